#include "pnp/stationary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "pnp/diagnostics.hpp"
#include "pnp/numerics.hpp"
#include "pnp/poisson.hpp"

namespace pnp {

namespace {

// n[c] = M e^{-c-phi} / int e^{-c-phi}, shifted to avoid overflow.
RadialField boltzmann(const RadialField& c, const RadialField& phi, double mass) {
  const std::size_t n = c.size();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) lo = std::min(lo, c[i] + phi[i]);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(lo - c[i] - phi[i]);
  RadialField out(c.grid_ptr(), std::move(e));
  const double z = integrate(out);
  for (double& v : out.values()) v *= mass / z;
  return out;
}

}  // namespace

StationaryState make_state(RadialField n, const Potential& phi) {
  StationaryState st{n, solve_radial(n), cumulated_mass(n), phi};
  st.mass = integrate(n);
  const RadialField ph = phi.sample(n.grid_ptr());
  const double floor = 1e-12 * n.max();
  double sum = 0.0;
  int count = 0;
  std::vector<double> el(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    el[i] = std::log(std::max(n[i], 1e-300)) + ph[i] + st.c_inf[i];
    if (n[i] > floor) {
      sum += el[i];
      ++count;
    }
  }
  st.lagrange_lambda = sum / count;
  double res = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n[i] > floor) res = std::max(res, std::abs(el[i] - st.lagrange_lambda));
  st.residual = res;
  st.free_energy = free_energy(n, phi);
  return st;
}

StationaryState solve_fixed_point(const Potential& phi, double mass, const GridPtr& grid,
                                  FixedPointOptions opts) {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("solve_fixed_point: mass must be positive");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw std::invalid_argument("solve_fixed_point: damping must lie in (0, 1]");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");

  const double probe = std::min(grid->r_max(), phi.valid_range());
  if (probe > 1.25) {
    const auto rep = check_conditions(phi, mass, grid->dimension(), probe);
    if (!rep.all_passed()) warn("confinement conditions not met by " + phi.describe());
  }

  const RadialField ph = phi.sample(grid);
  RadialField c = RadialField::zeros(grid);
  double theta = opts.damping;
  double last_change = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const RadialField target = green_solve(boltzmann(c, ph, mass));
    double change = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double next = (1.0 - theta) * c[i] + theta * target[i];
      change = std::max(change, std::abs(next - c[i]));
      c[i] = next;
    }
    if (change < opts.tol) {
      StationaryState st = make_state(boltzmann(c, ph, mass), phi);
      st.iterations = it;
      return st;
    }
    if (change > last_change && theta > 1e-3) theta *= 0.5;
    last_change = change;
  }
  throw ConvergenceError("solve_fixed_point: no convergence", last_change, opts.max_iterations);
}

// --- shooting --------------------------------------------------------------

double default_s_max(double mu) { return 14.0 * std::log(10.0) * 4.0 / mu; }

double shooting_second_derivative(double mu, double s, double Phi, double dPhi) {
  return dPhi * (Phi / (2.0 * s) - 0.5 * mu);
}

namespace {

using State2 = std::array<double, 2>;
namespace odeint = boost::numeric::odeint;

struct Trajectory {
  bool blew_up = false;
  double Phi_end = 0.0;
  double dPhi_end = 0.0;
};

// Integrates from the series start up to s_end, recording Phi and Phi' at the
// increasing abscissae `at` when output vectors are given.
Trajectory integrate_shot(double mu, double a, double s_end, const std::vector<double>& at,
                          std::vector<double>* Phi, std::vector<double>* dPhi) {
  const double b = 0.25 * a * a - 0.25 * mu * a;
  const double s0 = std::min(1e-6 / mu, 1e-3 * s_end);
  auto series = [&](double s) { return State2{a * s + b * s * s, a + 2.0 * b * s}; };
  State2 x = series(s0);
  double s = s0;
  double dt = s0;
  const double cap = 1e8 * (1.0 + a * s_end);

  auto rhs = [mu](const State2& y, State2& dy, double t) {
    dy[0] = y[1];
    dy[1] = shooting_second_derivative(mu, t, y[0], y[1]);
  };
  auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<State2>());

  auto advance_to = [&](double target) {
    while (s < target) {
      double step = std::min(dt, target - s);
      const bool truncated = step < dt;
      if (stepper.try_step(rhs, x, s, step) == odeint::success) {
        if (!truncated) dt = step;
        if (!std::isfinite(x[0]) || std::abs(x[0]) > cap) return false;
      } else {
        dt = step;
        if (!(dt > 1e-300)) return false;
      }
    }
    return true;
  };

  Trajectory tr;
  std::size_t k = 0;
  const std::size_t count = Phi ? at.size() : 0;
  bool end_done = false;
  while (k < count || !end_done) {
    const double next = k < count ? at[k] : std::numeric_limits<double>::infinity();
    if (!end_done && s_end <= next) {
      if (!advance_to(s_end)) {
        tr.blew_up = true;
        return tr;
      }
      tr.Phi_end = x[0];
      tr.dPhi_end = x[1];
      end_done = true;
      continue;
    }
    State2 y;
    if (next <= s0) {
      y = series(next);
    } else {
      if (!advance_to(next)) {
        tr.blew_up = true;
        return tr;
      }
      y = x;
    }
    (*Phi)[k] = y[0];
    (*dPhi)[k] = y[1];
    ++k;
  }
  return tr;
}

}  // namespace

double shoot_mass_function(double mu, double a, double s_end) {
  const Trajectory tr = integrate_shot(mu, a, s_end, {}, nullptr, nullptr);
  return tr.blew_up ? std::numeric_limits<double>::infinity() : tr.Phi_end;
}

ShootingSolution solve_shooting(double mu, double mass, const GridPtr& grid, double tol,
                                double s_max) {
  if (!(mu > 0.0) || !(mass > 0.0)) throw std::invalid_argument("solve_shooting: mu and M must be positive");
  if (!grid || grid->dimension() != 2) throw std::invalid_argument("solve_shooting: needs a d = 2 grid");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_shooting: tol must be positive");
  if (s_max <= 0.0) s_max = default_s_max(mu);

  const double target = mass / (2.0 * std::numbers::pi);
  auto residual = [&](double a) {
    const double v = shoot_mass_function(mu, a, s_max);
    return std::isinf(v) ? 1e6 * (1.0 + target) : v - target;
  };

  double lo = mass * mu / (8.0 * std::numbers::pi);
  double hi = 10.0 * mass * mu / (4.0 * std::numbers::pi);
  double flo = residual(lo), fhi = residual(hi);
  for (int expand = 0; expand < 60 && flo > 0.0; ++expand) flo = residual(lo *= 0.5);
  for (int expand = 0; expand < 60 && fhi < 0.0; ++expand) fhi = residual(hi *= 2.0);
  if (flo > 0.0 || fhi < 0.0)
    throw ConvergenceError("solve_shooting: no bracket for the initial slope", std::min(std::abs(flo), std::abs(fhi)), 0);

  std::uintmax_t max_iter = 300;
  auto [a0, a1] = boost::math::tools::toms748_solve(
      residual, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  double a = 0.5 * (a0 + a1);
  if (std::abs(residual(a0)) < std::abs(residual(a))) a = a0;
  if (std::abs(residual(a1)) < std::abs(residual(a))) a = a1;

  ShootingSolution sol;
  sol.mu = mu;
  sol.mass = mass;
  sol.a = a;
  sol.s_max = s_max;
  sol.grid = grid;
  sol.s.resize(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) sol.s[i] = grid->node(i) * grid->node(i);
  sol.Phi.assign(grid->size(), 0.0);
  sol.dPhi.assign(grid->size(), 0.0);
  sol.dPhi[0] = a;
  const Trajectory tr = integrate_shot(mu, a, s_max, sol.s, &sol.Phi, &sol.dPhi);
  sol.Phi[0] = 0.0;
  sol.dPhi[0] = a;
  if (tr.blew_up) throw ConvergenceError("solve_shooting: final trajectory blew up", 0.0, 0);
  sol.target_mass_error = std::abs(2.0 * std::numbers::pi * shoot_mass_function(mu, a, s_max) - mass) / mass;
  sol.converged = sol.target_mass_error <= tol;
  if (!sol.converged)
    throw ConvergenceError("solve_shooting: mass target not met", sol.target_mass_error,
                           static_cast<int>(max_iter));
  return sol;
}

RadialField reconstruct_density(const ShootingSolution& sol) {
  if (!sol.converged || !sol.grid) throw std::invalid_argument("reconstruct_density: solution not converged");
  std::vector<double> n(sol.dPhi.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = 2.0 * sol.dPhi[i];
  return RadialField(sol.grid, std::move(n));
}

void write_state(const StationaryState& st, const std::string& dir, const std::string& method) {
  std::filesystem::create_directories(dir);
  write_csv(st.n_inf, dir + "/n_inf.csv");
  write_csv(st.c_inf, dir + "/c_inf.csv");
  nlohmann::ordered_json meta;
  meta["method"] = method;
  meta["M"] = st.mass;
  meta["dimension"] = st.dimension();
  meta["potential"] = st.potential.describe();
  if (st.potential.is_harmonic()) meta["mu"] = st.potential.parameter();
  meta["lambda"] = st.lagrange_lambda;
  meta["residual"] = st.residual;
  meta["free_energy"] = st.free_energy;
  meta["iterations"] = st.iterations;
  std::ofstream(dir + "/meta.json") << meta.dump(2) << '\n';
}

}  // namespace pnp
