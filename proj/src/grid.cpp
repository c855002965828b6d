#include "pnp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace pnp {

double sphere_area(int dimension) {
  switch (dimension) {
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw std::invalid_argument("dimension must be 2 or 3");
  }
}

double ball_volume(int dimension, double r) {
  return sphere_area(dimension) * std::pow(r, dimension) / dimension;
}

namespace {

// Volume of the shell a <= |x| <= b.
double shell(int d, double a, double b) {
  if (d == 2) return std::numbers::pi * (b - a) * (b + a);
  return 4.0 * std::numbers::pi / 3.0 * (b - a) * (b * b + a * b + a * a);
}

}  // namespace

RadialGrid::RadialGrid(int dimension, std::vector<double> nodes, SpacingSpec spacing)
    : dimension_(dimension), spacing_(spacing), nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  volumes_.resize(n);
  face_areas_.resize(n - 1);
  const double omega = pnp::sphere_area(dimension_);
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double outer = i + 1 < n ? face(i) : nodes_.back();
    volumes_[i] = shell(dimension_, inner, outer);
    inner = outer;
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    face_areas_[i] = omega * std::pow(face(i), dimension_ - 1);
}

GridPtr make_grid(int dimension, double r_max, int intervals, SpacingSpec spacing) {
  if (dimension != 2 && dimension != 3)
    throw std::invalid_argument("make_grid: dimension must be 2 or 3");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw std::invalid_argument("make_grid: R_max must be positive");
  if (intervals < 16) throw std::invalid_argument("make_grid: need at least 16 intervals");

  std::vector<double> r(static_cast<std::size_t>(intervals) + 1);
  if (spacing.kind == Spacing::uniform || spacing.stretch == 1.0) {
    for (int i = 0; i <= intervals; ++i) r[i] = r_max * i / intervals;
  } else {
    const double q = spacing.stretch;
    if (!(q > 1.0) || !std::isfinite(q))
      throw std::invalid_argument("make_grid: graded stretch must be >= 1");
    // h_i = h_0 q^i with sum h_i = r_max
    const double h0 = r_max * (q - 1.0) / std::expm1(intervals * std::log(q));
    double h = h0;
    r[0] = 0.0;
    for (int i = 1; i <= intervals; ++i) {
      r[i] = r[i - 1] + h;
      h *= q;
    }
    r[intervals] = r_max;
  }
  return GridPtr(new RadialGrid(dimension, std::move(r), spacing));
}

RadialField::RadialField(GridPtr grid, std::vector<double> values, Parity parity)
    : grid_(std::move(grid)), values_(std::move(values)), parity_(parity) {
  if (!grid_) throw std::invalid_argument("RadialField: null grid");
  if (values_.size() != grid_->size())
    throw std::invalid_argument("RadialField: value count does not match node count");
}

RadialField RadialField::constant(GridPtr grid, double value) {
  std::vector<double> v(grid->size(), value);
  return RadialField(std::move(grid), std::move(v));
}

RadialField RadialField::sample(GridPtr grid, const std::function<double(double)>& f,
                                Parity parity) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
  return RadialField(std::move(grid), std::move(v), parity);
}

double RadialField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double RadialField::min() const { return *std::min_element(values_.begin(), values_.end()); }

bool same_grid(const RadialField& a, const RadialField& b) {
  return a.grid_ptr() == b.grid_ptr();
}

double integrate(const RadialField& f) {
  const auto w = f.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

double integrate_product(const RadialField& a, const RadialField& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("integrate_product: grid mismatch");
  const auto w = a.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

double lp_norm(const RadialField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  const auto w = f.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), p);
  return std::pow(s, 1.0 / p);
}

std::vector<double> node_enclosed_mass(const RadialField& n) {
  const RadialGrid& g = n.grid();
  const int d = g.dimension();
  std::vector<double> m(g.size());
  double below = 0.0;  // mass of shells 0..i-1
  double inner = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    m[i] = below + n[i] * shell(d, inner, g.node(i));
    below += n[i] * g.volume(i);
    if (i + 1 < g.size()) inner = g.face(i);
  }
  return m;
}

RadialField cumulated_mass(const RadialField& n) {
  for (double v : n.values())
    if (v < 0.0) throw std::invalid_argument("cumulated_mass: negative density");
  auto m = node_enclosed_mass(n);
  if (n.grid().dimension() == 2)
    for (double& v : m) v /= 2.0 * std::numbers::pi;
  return RadialField(n.grid_ptr(), std::move(m));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const RadialField& f, std::ostream& out) {
  out << "r,value\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << format_number(f.grid().node(i)) << ',' << format_number(f[i]) << '\n';
}

void write_csv(const RadialField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_csv(f, out);
}

}  // namespace pnp
