#include "pnp/poisson.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pnp/numerics.hpp"

namespace pnp {

double GreenKernel::constant() const {
  return dimension == 2 ? 1.0 / (2.0 * std::numbers::pi) : 1.0 / (4.0 * std::numbers::pi);
}

double GreenKernel::operator()(double r) const {
  return dimension == 2 ? -constant() * std::log(r) : constant() / r;
}

namespace {

double outer_coefficient(const RadialGrid& g) {
  return GreenKernel{g.dimension()}(g.r_max());
}

}  // namespace

std::vector<double> face_gradient(const RadialField& source) {
  const RadialGrid& g = source.grid();
  std::vector<double> grad(g.size() - 1);
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    m += g.volume(i) * source[i];
    grad[i] = -m / g.face_area(i);
  }
  return grad;
}

RadialField green_solve(const RadialField& source) {
  const RadialGrid& g = source.grid();
  const std::size_t n = g.size();
  std::vector<double> m(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += g.volume(i) * source[i];
    m[i] = acc;
  }
  std::vector<double> c(n);
  c[n - 1] = outer_coefficient(g) * m[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) c[i] = c[i + 1] + m[i] / g.transmissibility(i);
  return RadialField(source.grid_ptr(), std::move(c), Parity::even);
}

RadialField solve_radial(const RadialField& n) {
  for (double v : n.values())
    if (v < 0.0) throw std::invalid_argument("solve_radial: negative density");
  const RadialGrid& g = n.grid();
  const double total = integrate(n);
  const std::size_t last = g.size() - 1;
  if (total > 0.0 && n[last] * g.volume(last) / total > 1e-10)
    warn("solve_radial: density not negligible at R_max; mass outside the grid is dropped");
  return green_solve(n);
}

RadialField discrete_laplacian(const RadialField& c) {
  const RadialGrid& g = c.grid();
  const std::size_t n = g.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double flux = 0.0;
    if (i + 1 < n) flux -= g.transmissibility(i) * (c[i + 1] - c[i]);
    if (i > 0) flux += g.transmissibility(i - 1) * (c[i] - c[i - 1]);
    out[i] = flux / g.volume(i);
  }
  return RadialField(c.grid_ptr(), std::move(out));
}

double grad_c_sup_bound(const RadialField& n) {
  const int d = n.grid().dimension();
  const double p = d + 1.0;
  return lp_norm(n, 1.0) +
         std::pow(d, d / p) * std::pow(sphere_area(d), -1.0 / p) * lp_norm(n, p);
}

}  // namespace pnp
