#include "pnp/selfsimilar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "pnp/diagnostics.hpp"
#include "pnp/numerics.hpp"

namespace pnp {

SelfSimilarMap::SelfSimilarMap(double mu) : mu(mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("SelfSimilarMap: mu must be positive");
}

double SelfSimilarMap::scale(double t) const { return std::sqrt(1.0 + 2.0 * mu * t); }
double SelfSimilarMap::confined_time(double t) const { return std::log1p(2.0 * mu * t) / (2.0 * mu); }
double SelfSimilarMap::unconfined_time(double s) const { return std::expm1(2.0 * mu * s) / (2.0 * mu); }

RadialField rescale_profile(const RadialField& f, double scale, double factor, const GridPtr& target) {
  const RadialGrid& src = f.grid();
  std::vector<double> r(src.nodes().begin(), src.nodes().end());
  std::vector<double> lf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0)) throw std::invalid_argument("rescale_profile: profile must be positive");
    lf[i] = std::log(f[i]);
  }
  const double right_slope = (lf.back() - lf[lf.size() - 2]) / (r.back() - r[r.size() - 2]);
  const CubicSpline spline(std::move(r), std::move(lf), 0.0, std::numeric_limits<double>::quiet_NaN());
  const double rmax = src.r_max();
  const double end_value = spline(rmax);
  std::vector<double> out(target->size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = target->node(i) / scale;
    const double l = x <= rmax ? spline(x) : end_value + right_slope * (x - rmax);
    out[i] = factor * std::exp(l);
  }
  return RadialField(target, std::move(out), f.parity());
}

std::pair<RadialField, double> to_confined(const RadialField& u, double t, const SelfSimilarMap& map,
                                           GridPtr target) {
  if (!(t >= 0.0)) throw std::invalid_argument("to_confined: t must be nonnegative");
  if (u.grid().dimension() != 2) throw std::invalid_argument("to_confined: the map is two-dimensional");
  if (!target) target = u.grid_ptr();
  const double R = map.scale(t);
  // n(xi) = R^2 u(R xi): sample u at r = R xi, i.e. profile stretched by 1/R
  return {rescale_profile(u, 1.0 / R, R * R, target), map.confined_time(t)};
}

std::pair<RadialField, double> to_unconfined(const RadialField& n, double s, const SelfSimilarMap& map,
                                             GridPtr target) {
  if (!(s >= 0.0)) throw std::invalid_argument("to_unconfined: s must be nonnegative");
  if (n.grid().dimension() != 2) throw std::invalid_argument("to_unconfined: the map is two-dimensional");
  if (!target) target = n.grid_ptr();
  const double t = map.unconfined_time(s);
  const double R = map.scale(t);
  return {rescale_profile(n, R, 1.0 / (R * R), target), t};
}

std::pair<RadialField, RadialField> self_similar_profile(const StationaryState& st, double t,
                                                         GridPtr target) {
  if (!(t >= 0.0)) throw std::invalid_argument("self_similar_profile: t must be nonnegative");
  if (!st.potential.is_harmonic() || st.dimension() != 2)
    throw std::invalid_argument("self_similar_profile: harmonic d = 2 state required");
  if (!target) target = st.grid_ptr();
  const SelfSimilarMap map(st.potential.parameter());
  const double R = map.scale(t);
  RadialField u = rescale_profile(st.n_inf, R, 1.0 / (R * R), target);
  // c_inf is not positive everywhere; interpolate it directly
  std::vector<double> r(st.grid().nodes().begin(), st.grid().nodes().end());
  std::vector<double> c(st.c_inf.values().begin(), st.c_inf.values().end());
  const CubicSpline spline(r, c, 0.0, std::numeric_limits<double>::quiet_NaN());
  const double rmax = st.grid().r_max();
  const double far = st.mass / (2.0 * std::numbers::pi);
  std::vector<double> v(target->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = target->node(i) / R;
    v[i] = x <= rmax ? spline(x) : st.c_inf[st.c_inf.size() - 1] - far * std::log(x / rmax);
  }
  return {std::move(u), RadialField(target, std::move(v))};
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& series, double t0, double t1) {
  if (!(t0 >= 0.0) || !(t1 > t0)) throw std::invalid_argument("fit_power_law: bad window");
  if ((1.0 + 2.0 * t1) / (1.0 + 2.0 * t0) < 10.0)
    throw std::invalid_argument("fit_power_law: window spans less than one decade of 1 + 2t");
  std::vector<std::pair<double, double>> logt;
  for (const auto& [t, v] : series) logt.emplace_back(std::log1p(2.0 * t), v);
  const DecayFit fit = fit_decay(logt, std::log1p(2.0 * t0), std::log1p(2.0 * t1));
  return {-fit.rate, fit.prefactor, fit.fit_quality, fit.samples};
}

const NormSeries& AsymptoticsReport::find(const std::string& name) const {
  for (const auto& n : norms)
    if (n.norm == name) return n;
  throw std::out_of_range("AsymptoticsReport: no norm " + name);
}

std::string AsymptoticsReport::to_json() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& n : norms) {
    out.push_back({{"norm", n.norm},
                   {"fitted_exponent", n.fit.exponent},
                   {"predicted_exponent", n.predicted_exponent},
                   {"window", {t0, t1}}});
  }
  out.push_back({{"norm", "L1_centered"},
                 {"fitted_exponent", radial_l1.exponent},
                 {"predicted_exponent", -1.0},
                 {"window", {t0, t1}}});
  return out.dump(2);
}

namespace {

struct Distances {
  double l1 = 0.0, lp = 0.0, g2 = 0.0, gq = 0.0;
};

// Distances on R^2 between n(|xi - a|) and n_inf(|xi|), and between the
// gradients of their potentials. Polar quadrature on the radial grid.
Distances shifted_distances(const RadialField& n, const StationaryState& st, double a,
                            const AsymptoticsOptions& opts) {
  const RadialGrid& g = st.grid();
  std::vector<double> r(g.nodes().begin(), g.nodes().end());
  std::vector<double> nv(n.values().begin(), n.values().end());
  const auto m = node_enclosed_mass(n);
  const auto minf = node_enclosed_mass(st.n_inf);
  const CubicSpline dens(r, nv, 0.0, std::numeric_limits<double>::quiet_NaN());
  const CubicSpline mass(r, m, 0.0, std::numeric_limits<double>::quiet_NaN());
  const double rmax = g.r_max();
  const double total = m.back();
  const double two_pi = 2.0 * std::numbers::pi;

  auto density_at = [&](double rho) { return rho <= rmax ? std::max(0.0, dens(rho)) : 0.0; };
  // c'(rho) = -m(rho) / (2 pi rho)
  auto field_at = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    return -(rho <= rmax ? mass(rho) : total) / (two_pi * rho);
  };

  Distances d;
  const int K = opts.angles;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double ri = g.node(i);
    const double w = g.volume(i) / K;
    const double ninf = st.n_inf[i];
    const double cinf = ri > 0.0 ? -minf[i] / (two_pi * ri) : 0.0;
    for (int j = 0; j < K; ++j) {
      const double th = two_pi * (j + 0.5) / K;
      const double x = ri * std::cos(th), y = ri * std::sin(th);
      const double dx = x - a, rho = std::hypot(dx, y);
      const double diff = std::abs(density_at(rho) - ninf);
      d.l1 += w * diff;
      d.lp += w * std::pow(diff, opts.p);
      const double fs = field_at(rho);
      const double gx = (rho > 0 ? fs * dx / rho : 0.0) - (ri > 0 ? cinf * x / ri : 0.0);
      const double gy = (rho > 0 ? fs * y / rho : 0.0) - (ri > 0 ? cinf * y / ri : 0.0);
      const double gn = std::hypot(gx, gy);
      d.g2 += w * gn * gn;
      d.gq += w * std::pow(gn, opts.q);
    }
  }
  // past R_max both fields are point charges; their difference is a dipole
  // field of magnitude M a / (2 pi r^2)
  const double dip = total * std::abs(a) / two_pi;
  d.g2 += two_pi * dip * dip / (2.0 * rmax * rmax);
  d.gq += two_pi * std::pow(dip, opts.q) * std::pow(rmax, 2.0 - 2.0 * opts.q) / (2.0 * opts.q - 2.0);
  d.lp = std::pow(d.lp, 1.0 / opts.p);
  d.g2 = std::sqrt(d.g2);
  d.gq = std::pow(d.gq, 1.0 / opts.q);
  return d;
}

}  // namespace

AsymptoticsReport intermediate_asymptotics_check(
    const std::vector<std::pair<double, RadialField>>& confined, const StationaryState& st,
    const AsymptoticsOptions& opts) {
  if (!st.potential.is_harmonic() || st.dimension() != 2 || st.potential.parameter() != 1.0)
    throw std::invalid_argument("intermediate_asymptotics_check: needs the d = 2 harmonic state with mu = 1");
  if (!(opts.p > 1.0) || !(opts.q >= 2.0) || opts.angles < 8)
    throw std::invalid_argument("intermediate_asymptotics_check: bad options");
  const SelfSimilarMap map(1.0);

  AsymptoticsReport rep;
  rep.t0 = opts.t0;
  rep.t1 = opts.t1;
  NormSeries l1{"L1", {}, -0.5, {}};
  NormSeries lp{"L" + format_number(opts.p), {}, -0.5 - (opts.p - 1.0) / opts.p, {}};
  NormSeries g2{"grad_v_L2", {}, -0.5, {}};
  NormSeries gq{"grad_v_L" + format_number(opts.q), {}, -1.0 + 1.0 / opts.q, {}};
  std::vector<std::pair<double, double>> centered;

  for (const auto& [s, n] : confined) {
    if (n.grid_ptr() != st.grid_ptr()) throw std::invalid_argument("intermediate_asymptotics_check: grid mismatch");
    if (std::abs(integrate(n) - st.mass) > 1e-8 * st.mass)
      throw std::invalid_argument("intermediate_asymptotics_check: trajectory mass differs from the state");
    const double t = map.unconfined_time(s);
    const double R = map.scale(t);
    const Distances d = shifted_distances(n, st, opts.offset / R, opts);
    l1.values.emplace_back(t, d.l1);
    lp.values.emplace_back(t, std::pow(R, -2.0 * (opts.p - 1.0) / opts.p) * d.lp);
    g2.values.emplace_back(t, d.g2);
    gq.values.emplace_back(t, std::pow(R, -1.0 + 2.0 / opts.q) * d.gq);
    centered.emplace_back(t, lp_distance(n, st, 1.0));
  }
  for (NormSeries* ns : {&l1, &lp, &g2, &gq}) {
    ns->fit = fit_power_law(ns->values, opts.t0, opts.t1);
    rep.norms.push_back(*ns);
  }
  rep.radial_l1 = fit_power_law(centered, opts.t0, opts.t1);
  return rep;
}

}  // namespace pnp
