#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "pnp/evolution.hpp"
#include "pnp/poisson.hpp"

using namespace pnp;

namespace {

EvolutionConfig perturbed_run(const StationaryState& st, double dt, double t_end) {
  auto f = RadialField::sample(st.grid_ptr(), [](double r) { return r * r; });
  EvolutionConfig cfg(perturbed_density(st, f, 0.1));
  cfg.potential = st.potential;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.reference = st;
  return cfg;
}

}  // namespace

TEST_CASE("stationary state is a discrete fixed point of the step") {
  const auto& st = fixtures::harmonic_state(1024);
  EvolutionConfig cfg(st.n_inf);
  auto next = step(st.n_inf, st.c_inf, cfg, 0.1);
  double err = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) err = std::max(err, std::abs(next[i] - st.n_inf[i]));
  CHECK(err <= 1e-12 * st.n_inf.max());
}

TEST_CASE("heat equation limit: variance grows by 2 d dt") {
  for (int d : {2, 3}) {
    auto g = make_grid(d, 14.0, 2048);
    auto n = RadialField::sample(g, [](double r) { return std::exp(-r * r / 2); });
    EvolutionConfig cfg(n);
    cfg.terms.confinement = false;
    cfg.terms.coupling = false;
    const double dt = 1e-3;
    auto next = step(n, RadialField::zeros(g), cfg, dt);
    auto r2 = RadialField::sample(g, [](double r) { return r * r; });
    const double M = integrate(n);
    CHECK(std::abs(integrate(next) / M - 1.0) <= 1e-14);
    const double growth = (integrate_product(next, r2) - integrate_product(n, r2)) / M;
    CHECK(growth == doctest::Approx(2.0 * d * dt).epsilon(1e-3));
  }
}

TEST_CASE("one step conserves mass for arbitrary valid input") {
  const auto& st = fixtures::harmonic_state(512);
  EvolutionConfig cfg(st.n_inf);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto n = perturbed_density(st, random_radial_profile(st.grid_ptr(), seed), 0.8);
    for (double dt : {1e-4, 1e-2, 1.0}) {
      auto next = step(n, green_solve(n), cfg, dt);
      CHECK(std::abs(integrate(next) / integrate(n) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("starting at equilibrium stays there") {
  const auto& st = fixtures::harmonic_state(512);
  EvolutionConfig cfg(st.n_inf);
  cfg.reference = st;
  cfg.dt = 1e-2;
  cfg.t_end = 2.0;
  cfg.stop_below = 0.0;
  auto traj = run(cfg);
  for (const auto& s : traj.diagnostics) CHECK(s.weighted_l2 <= 1e-12);
  auto rep = dissipation_check(traj);
  CHECK(rep.below_floor);
  CHECK(rep.points == 0);
}

TEST_CASE("radial perturbation decays at rate 4 mu with monotone free energy") {
  const auto& st = fixtures::harmonic_state(1024);
  auto cfg = perturbed_run(st, 1e-3, 10.0);
  cfg.log_every = 10;
  auto traj = run(cfg);
  const auto fit = fit_rates(traj.diagnostics);
  CHECK(fit.weighted_l2.rate >= 3.8);
  CHECK(fit.weighted_l2.rate <= 4.2);
  CHECK(fit.l1.rate >= 0.9 * 0.5 * fit.weighted_l2.rate);
  const double Finf = st.free_energy;
  const auto& d = traj.diagnostics;
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (d[k - 1].free_energy - Finf > 1e-12) CHECK(d[k].free_energy < d[k - 1].free_energy);
    CHECK(d[k].fisher >= 0.0);
    CHECK(d[k].l1 <= std::sqrt(st.mass * d[k].weighted_l2) * (1 + 1e-12));
  }
  CHECK(std::abs(d.back().mass / d.front().mass - 1.0) <= 1e-10);
}

TEST_CASE("Picard coupling gives the same rate") {
  const auto& st = fixtures::harmonic_state(512);
  auto lagged = perturbed_run(st, 1e-3, 10.0);
  lagged.log_every = 10;
  auto picard = lagged;
  picard.coupling_update = CouplingUpdate::picard;
  const double a = fit_rates(run(lagged).diagnostics).weighted_l2.rate;
  const double b = fit_rates(run(picard).diagnostics).weighted_l2.rate;
  CHECK(std::abs(a / b - 1.0) <= 0.01);
}

TEST_CASE("dissipation defect is first order in dt") {
  const auto& st = fixtures::harmonic_state(512);
  double prev = 0.0;
  for (double dt : {5e-4, 2.5e-4}) {
    auto cfg = perturbed_run(st, dt, 2.0);
    cfg.log_every = 1;
    auto rep = dissipation_check(run(cfg));
    CHECK_FALSE(rep.below_floor);
    if (prev > 0.0) CHECK(prev / rep.max_defect >= 1.8);
    prev = rep.max_defect;
  }
}

TEST_CASE("heat limit satisfies the entropy dissipation identity") {
  auto g = make_grid(2, 14.0, 1024);
  EvolutionConfig cfg(RadialField::sample(g, [](double r) { return std::exp(-r * r / 2); }));
  cfg.terms.confinement = false;
  cfg.terms.coupling = false;
  cfg.dt = 1e-4;
  cfg.t_end = 0.5;
  auto rep = dissipation_check(run(cfg));
  CHECK(rep.points > 100);
  CHECK(rep.max_defect <= 1e-3);
}

TEST_CASE("Lp norms stay bounded and every distance goes to zero") {
  const auto& st = fixtures::harmonic_state(512);
  auto n0 = RadialField::sample(st.grid_ptr(), [](double r) { return std::exp(-r * r / 0.5); });
  const double s = st.mass / integrate(n0);
  for (double& v : n0.values()) v *= s;
  EvolutionConfig cfg(n0);
  cfg.reference = st;
  cfg.dt = 1e-3;
  cfg.t_end = 12.0;
  cfg.log_every = 50;
  cfg.snapshot_every = 1;
  auto traj = run(cfg);
  const double inf = std::numeric_limits<double>::infinity();
  for (double p : {2.0, 4.0, inf}) {
    double early = 0.0, late = 0.0;
    for (const auto& [t, n] : traj.snapshots) {
      if (t >= 0.5 && t <= 2.0) early = std::max(early, lp_norm(n, p));
      if (t >= 4.0) late = std::max(late, lp_norm(n, p));
    }
    CHECK(late <= 1.1 * early);
  }
  const auto& first = traj.snapshots.front().second;
  const auto& last = traj.final_state;
  CHECK(weighted_l2_distance(last, st) <= 1e-8 * weighted_l2_distance(first, st));
  CHECK(lp_distance(last, st, 1.0) <= 1e-4 * lp_distance(first, st, 1.0));
  CHECK(grad_c_distance(last, st) <= 1e-4 * grad_c_distance(first, st));
}

TEST_CASE("run validates its configuration") {
  const auto& st = fixtures::harmonic_state(512);
  EvolutionConfig cfg(st.n_inf);
  cfg.dt = 0.0;
  CHECK_THROWS_AS(run(cfg), std::invalid_argument);
  cfg.dt = 1e-3;
  cfg.log_every = 0;
  CHECK_THROWS_AS(run(cfg), std::invalid_argument);
  auto bad = st.n_inf;
  bad[3] = -1.0;
  EvolutionConfig neg(bad);
  CHECK_THROWS_AS(run(neg), std::invalid_argument);
  EvolutionTrajectory empty(st.n_inf);
  CHECK_THROWS_AS(dissipation_check(empty), std::invalid_argument);
  CHECK_THROWS_AS(fit_rates({}), std::invalid_argument);
}

TEST_CASE("diagnostics CSV") {
  std::ostringstream out;
  write_diagnostics_csv({DiagnosticSample{0.5, 1.0, -2.0, 0.25, 0.0, 0.0, 0.0}}, out);
  CHECK(out.str() == "t,mass,free_energy,fisher,weighted_l2,l1,linf\n0.5,1,-2,0.25,0,0,0\n");
}
