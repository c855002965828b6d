#include "pnp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pnp/numerics.hpp"
#include "pnp/poisson.hpp"

namespace pnp {

RadialField drift_potential(const RadialField& c, const Potential& phi, EnergyTerms terms) {
  RadialField U = terms.coupling ? c : RadialField::zeros(c.grid_ptr());
  if (terms.confinement) {
    const RadialGrid& g = c.grid();
    for (std::size_t i = 0; i < g.size(); ++i) U[i] += phi.value(g.node(i));
  }
  return U;
}

RadialField step(const RadialField& n, const RadialField& c, const EvolutionConfig& cfg, double dt) {
  if (!same_grid(n, c)) throw std::invalid_argument("step: grid mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const RadialGrid& g = n.grid();
  const std::size_t m = g.size();
  const RadialField U = drift_potential(c, cfg.potential, cfg.terms);

  std::vector<double> lo(m, 0.0), di(m), up(m, 0.0), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    di[i] = g.volume(i) / dt;
    rhs[i] = g.volume(i) * n[i] / dt;
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double T = g.transmissibility(i);
    const double x = U[i + 1] - U[i];
    const double bp = bernoulli(x), bm = bernoulli(-x);
    di[i] += T * bp;
    up[i] = -T * bm;
    lo[i + 1] = -T * bp;
    di[i + 1] += T * bm;
  }
  std::vector<double> out;
  try {
    out = solve_tridiagonal(lo, di, up, rhs);
  } catch (const std::runtime_error& e) {
    throw StepRejected(e.what());
  }
  for (double v : out)
    if (!(v >= 0.0) || !std::isfinite(v)) throw StepRejected("step: update is not a valid density");
  return RadialField(n.grid_ptr(), std::move(out));
}

namespace {

void validate(const EvolutionConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("evolution: dt must be positive");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw std::invalid_argument("evolution: t_end must be positive");
  if (cfg.log_every < 1) throw std::invalid_argument("evolution: log_every must be >= 1");
  if (cfg.snapshot_every < 0) throw std::invalid_argument("evolution: snapshot_every must be >= 0");
  if (cfg.picard_iterations < 1) throw std::invalid_argument("evolution: picard_iterations must be >= 1");
  for (double v : cfg.initial.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("evolution: initial density must be nonnegative");
  if (!(integrate(cfg.initial) > 0.0)) throw std::invalid_argument("evolution: initial mass must be positive");
  if (cfg.reference && cfg.reference->grid_ptr() != cfg.initial.grid_ptr())
    throw std::invalid_argument("evolution: reference state lives on another grid");
}

DiagnosticSample sample(double t, const RadialField& n, const EvolutionConfig& cfg) {
  DiagnosticSample s;
  s.t = t;
  s.mass = integrate(n);
  s.free_energy = free_energy(n, cfg.potential, cfg.terms);
  s.fisher = fisher_information(n, cfg.potential, cfg.terms);
  if (cfg.reference) {
    s.weighted_l2 = weighted_l2_distance(n, *cfg.reference);
    s.l1 = lp_distance(n, *cfg.reference, 1.0);
    s.linf = lp_distance(n, *cfg.reference, std::numeric_limits<double>::infinity());
  } else {
    s.weighted_l2 = s.l1 = s.linf = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

}  // namespace

EvolutionTrajectory run(const EvolutionConfig& cfg) {
  validate(cfg);
  EvolutionTrajectory traj(cfg.initial);
  RadialField n = cfg.initial;
  double t = 0.0;
  double dt = cfg.dt;
  int since_growth = 0;
  int logged = 0;

  auto log = [&]() {
    traj.diagnostics.push_back(sample(t, n, cfg));
    if (cfg.snapshot_every > 0 && logged % cfg.snapshot_every == 0) traj.snapshots.emplace_back(t, n);
    ++logged;
  };
  log();

  const double t_stop = cfg.t_end * (1.0 - 1e-14);
  while (t < t_stop) {
    const double h = std::min(dt, cfg.t_end - t);
    RadialField next = n;
    try {
      RadialField c = cfg.terms.coupling ? green_solve(n) : RadialField::zeros(n.grid_ptr());
      next = step(n, c, cfg, h);
      if (cfg.coupling_update == CouplingUpdate::picard && cfg.terms.coupling) {
        for (int k = 0; k < cfg.picard_iterations; ++k) next = step(n, green_solve(next), cfg, h);
      }
    } catch (const StepRejected&) {
      ++traj.rejected;
      dt *= 0.5;
      since_growth = 0;
      if (dt < 1e-12 * cfg.dt) throw;
      continue;
    }
    n = std::move(next);
    t += h;
    ++traj.steps;
    if (++since_growth >= 50 && dt < cfg.dt) {
      dt = std::min(cfg.dt, 1.2 * dt);
      since_growth = 0;
    }
    const bool last = t >= t_stop;
    if (traj.steps % cfg.log_every == 0 || last) {
      log();
      if (cfg.reference && traj.diagnostics.back().weighted_l2 < cfg.stop_below) {
        traj.reached_floor = true;
        break;
      }
    }
  }
  traj.final_state = n;
  traj.final_time = t;
  return traj;
}

DissipationReport dissipation_check(const EvolutionTrajectory& traj, double relative_floor, double absolute_floor) {
  const auto& d = traj.diagnostics;
  if (d.size() < 3) throw std::invalid_argument("dissipation_check: need at least 3 samples");
  if (!(relative_floor > 0.0) || !(relative_floor < 1.0))
    throw std::invalid_argument("dissipation_check: relative_floor must lie in (0, 1)");
  double peak = 0.0;
  for (const auto& s : d) peak = std::max(peak, s.fisher);
  const double floor = std::max(absolute_floor, relative_floor * peak);
  DissipationReport rep;
  rep.below_floor = true;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    const double I = d[k].fisher;
    if (!(I > floor)) continue;
    const double rate = (d[k + 1].free_energy - d[k - 1].free_energy) / (d[k + 1].t - d[k - 1].t);
    rep.below_floor = false;
    rep.max_defect = std::max(rep.max_defect, std::abs(rate + I) / I);
    ++rep.points;
  }
  return rep;
}

RateFit fit_rates(const std::vector<DiagnosticSample>& rows, double start_fraction, double floor) {
  if (rows.empty() || std::isnan(rows.front().weighted_l2))
    throw std::invalid_argument("fit_rates: diagnostics carry no reference distances");
  RateFit fit;
  const double start = start_fraction * rows.front().weighted_l2;
  bool started = false;
  for (const auto& r : rows) {
    if (!started && r.weighted_l2 < start) {
      fit.t0 = r.t;
      started = true;
    }
    if (r.weighted_l2 > floor) fit.t1 = r.t;
  }
  if (!started || !(fit.t1 > fit.t0)) throw std::invalid_argument("fit_rates: empty decay window");
  std::vector<std::pair<double, double>> w, l1;
  for (const auto& r : rows) {
    w.emplace_back(r.t, r.weighted_l2);
    l1.emplace_back(r.t, r.l1);
  }
  fit.weighted_l2 = fit_decay(w, fit.t0, fit.t1);
  fit.l1 = fit_decay(l1, fit.t0, fit.t1);
  return fit;
}

void write_diagnostics_csv(const std::vector<DiagnosticSample>& rows, std::ostream& out) {
  out << "t,mass,free_energy,fisher,weighted_l2,l1,linf\n";
  for (const auto& r : rows) {
    out << format_number(r.t) << ',' << format_number(r.mass) << ',' << format_number(r.free_energy)
        << ',' << format_number(r.fisher) << ',' << format_number(r.weighted_l2) << ','
        << format_number(r.l1) << ',' << format_number(r.linf) << '\n';
  }
}

void write_trajectory(const EvolutionTrajectory& traj, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/diagnostics.csv");
  if (!out) throw std::runtime_error("cannot write " + dir + "/diagnostics.csv");
  write_diagnostics_csv(traj.diagnostics, out);
  if (!traj.snapshots.empty()) {
    std::filesystem::create_directories(dir + "/snapshots");
    for (const auto& [t, n] : traj.snapshots) write_csv(n, dir + "/snapshots/t_" + format_number(t) + ".csv");
  }
}

}  // namespace pnp
