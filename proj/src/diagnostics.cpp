#include "pnp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pnp/numerics.hpp"
#include "pnp/poisson.hpp"

namespace pnp {

namespace {

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

RadialField total_potential(const RadialField& n, const Potential& phi, EnergyTerms terms) {
  RadialField U = terms.coupling ? green_solve(n) : RadialField::zeros(n.grid_ptr());
  if (terms.confinement) {
    const RadialField ph = phi.sample(n.grid_ptr());
    for (std::size_t i = 0; i < U.size(); ++i) U[i] += ph[i];
  }
  return U;
}

void require_same_grid(const RadialField& n, const StationaryState& st, const char* who) {
  if (n.grid_ptr() != st.grid_ptr()) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

}  // namespace

double free_energy(const RadialField& n, const Potential& phi, EnergyTerms terms) {
  const RadialGrid& g = n.grid();
  double entropy = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (n[i] > 0.0) entropy += g.volume(i) * n[i] * safe_log(n[i]);
  double potential = 0.0;
  if (terms.confinement) {
    const RadialField ph = phi.sample(n.grid_ptr());
    potential = integrate_product(n, ph);
  }
  double field = 0.0;
  if (terms.coupling) field = 0.5 * integrate_product(n, green_solve(n));
  return entropy + potential + field;
}

std::vector<double> face_fluxes(const RadialField& n, const RadialField& U) {
  const RadialGrid& g = n.grid();
  std::vector<double> F(g.size() - 1);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double x = U[i + 1] - U[i];
    F[i] = g.transmissibility(i) * (bernoulli(x) * n[i] - bernoulli(-x) * n[i + 1]);
  }
  return F;
}

double fisher_information(const RadialField& n, const Potential& phi, EnergyTerms terms) {
  const RadialField U = total_potential(n, phi, terms);
  const auto F = face_fluxes(n, U);
  double sum = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double drive = safe_log(n[i]) - safe_log(n[i + 1]) - (U[i + 1] - U[i]);
    // both factors share a sign; the product is clipped at round-off level
    sum += std::max(0.0, F[i] * drive);
  }
  return sum;
}

std::vector<double> face_mobility(const RadialField& n_inf) {
  const RadialGrid& g = n_inf.grid();
  std::vector<double> D(g.size() - 1);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    D[i] = g.transmissibility(i) * n_inf[i] * bernoulli(safe_log(n_inf[i]) - safe_log(n_inf[i + 1]));
  return D;
}

RadialField project_zero_mean(const RadialField& f, const StationaryState& st) {
  require_same_grid(f, st, "project_zero_mean");
  const double shift = integrate_product(f, st.n_inf) / st.mass;
  RadialField out = f;
  for (double& v : out.values()) v -= shift;
  return out;
}

RadialField perturbed_density(const StationaryState& st, const RadialField& f, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("perturbed_density: epsilon must lie in (0, 1)");
  RadialField g = project_zero_mean(f, st);
  double sup = 0.0;
  for (double v : g.values()) sup = std::max(sup, std::abs(v));
  if (!(sup > 0.0) || !std::isfinite(sup)) throw std::invalid_argument("perturbed_density: profile is constant");
  RadialField n = st.n_inf;
  for (std::size_t i = 0; i < n.size(); ++i) n[i] *= 1.0 + epsilon * g[i] / sup;
  return n;
}

RadialField random_radial_profile(const GridPtr& grid, std::uint64_t seed, int terms) {
  if (terms < 1) throw std::invalid_argument("random_radial_profile: terms must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> xi(terms);
  for (double& x : xi) x = static_cast<double>(rng() >> 11) * 0x1p-53 - 0.5;
  const double R = grid->r_max();
  return RadialField::sample(grid, [&](double r) {
    double v = 0.0;
    for (int j = 0; j < terms; ++j) v += xi[j] * std::cos((j + 1) * std::numbers::pi * r / R);
    return v;
  });
}

Perturbation make_perturbation(RadialField f, const StationaryState& st) {
  require_same_grid(f, st, "make_perturbation");
  const double mean = integrate_product(f, st.n_inf);
  double scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) scale += st.grid().volume(i) * st.n_inf[i] * std::abs(f[i]);
  if (std::abs(mean) > 1e-10 * std::max(st.mass, scale))
    throw std::invalid_argument("make_perturbation: perturbation does not have zero mean");
  std::vector<double> src(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) src[i] = f[i] * st.n_inf[i];
  RadialField gc = green_solve(RadialField(st.grid_ptr(), std::move(src)));
  return {std::move(f), std::move(gc)};
}

double q1(const Perturbation& p, const StationaryState& st) { return scalar_product(p, p, st); }

double q1_field_form(const Perturbation& p, const StationaryState& st) {
  const RadialGrid& g = st.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += g.volume(i) * st.n_inf[i] * p.f[i] * p.f[i];
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double dg = p.gc[i + 1] - p.gc[i];
    sum += g.transmissibility(i) * dg * dg;
  }
  return sum;
}

double q2(const Perturbation& p, const StationaryState& st) {
  const auto D = face_mobility(st.n_inf);
  double sum = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i) {
    const double dw = (p.f[i + 1] + p.gc[i + 1]) - (p.f[i] + p.gc[i]);
    sum += D[i] * dw * dw;
  }
  return sum;
}

double scalar_product(const Perturbation& a, const Perturbation& b, const StationaryState& st) {
  const RadialGrid& g = st.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    sum += g.volume(i) * st.n_inf[i] * a.f[i] * (b.f[i] + b.gc[i]);
  return sum;
}

double weighted_l2_distance(const RadialField& n, const StationaryState& st) {
  require_same_grid(n, st, "weighted_l2_distance");
  const RadialGrid& g = st.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = n[i] - st.n_inf[i];
    sum += g.volume(i) * d * d / st.n_inf[i];
  }
  return sum;
}

double lp_distance(const RadialField& n, const StationaryState& st, double p) {
  require_same_grid(n, st, "lp_distance");
  if (!(p >= 1.0)) throw std::invalid_argument("lp_distance: p must be >= 1");
  std::vector<double> d(n.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = n[i] - st.n_inf[i];
  return lp_norm(RadialField(n.grid_ptr(), std::move(d)), p);
}

double grad_c_distance(const RadialField& n, const StationaryState& st) {
  require_same_grid(n, st, "grad_c_distance");
  const auto a = face_gradient(n);
  const auto b = face_gradient(st.n_inf);
  const RadialGrid& g = st.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += g.face_area(i) * g.width(i) * d * d;
  }
  return std::sqrt(sum);
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& series, double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("fit_decay: empty window");
  std::vector<double> ts, ys;
  for (const auto& [t, v] : series) {
    if (t < t0 || t > t1) continue;
    if (!(v > 0.0)) throw std::invalid_argument("fit_decay: nonpositive value in window");
    ts.push_back(t);
    ys.push_back(std::log(v));
  }
  const std::size_t n = ts.size();
  if (n < 10) throw std::invalid_argument("fit_decay: fewer than 10 samples in window");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += ts[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double cxx = 0, cxy = 0, cyy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = ts[i] - mx, dy = ys[i] - my;
    cxx += dx * dx;
    cxy += dx * dy;
    cyy += dy * dy;
  }
  if (!(cxx > 0.0)) throw std::invalid_argument("fit_decay: degenerate time samples");
  const double slope = cxy / cxx;
  DecayFit fit;
  fit.t0 = t0;
  fit.t1 = t1;
  fit.rate = -slope;
  fit.prefactor = std::exp(my - slope * mx);
  fit.fit_quality = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  fit.samples = static_cast<int>(n);
  return fit;
}

}  // namespace pnp
