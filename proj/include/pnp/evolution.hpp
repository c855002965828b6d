// Time integration of the radial drift-diffusion system
//   dn/dt = Laplacian(n) + div(n grad(c + phi)),  -Laplacian(c) = n.
//
// Finite volumes on the dual shells with Scharfetter-Gummel fluxes and
// backward Euler in n. The total potential is taken from the previous step
// (lagged) or refreshed by a few Picard sweeps. Each step is one tridiagonal
// M-matrix solve whose columns sum to V/dt, so mass is conserved to round-off
// and positivity holds for every dt.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnp/diagnostics.hpp"
#include "pnp/grid.hpp"
#include "pnp/potentials.hpp"
#include "pnp/stationary.hpp"

namespace pnp {

enum class CouplingUpdate { lagged, picard };

struct EvolutionConfig {
  Potential potential = Potential::harmonic(1.0);
  RadialField initial;
  double dt = 1e-3;
  double t_end = 1.0;
  CouplingUpdate coupling_update = CouplingUpdate::lagged;
  int picard_iterations = 3;
  int log_every = 1;
  /// Keep a density snapshot every this many log samples; 0 keeps none.
  int snapshot_every = 0;
  /// Switch off phi (free drift) or c (no self-interaction).
  EnergyTerms terms;
  /// Distances to this state are logged; the run stops when the weighted L2
  /// distance drops below stop_below.
  std::optional<StationaryState> reference;
  double stop_below = 1e-14;

  explicit EvolutionConfig(RadialField n0) : initial(std::move(n0)) {}
};

struct DiagnosticSample {
  double t = 0.0;
  double mass = 0.0;
  double free_energy = 0.0;
  double fisher = 0.0;
  double weighted_l2 = 0.0;  // NaN without a reference state
  double l1 = 0.0;
  double linf = 0.0;
};

struct EvolutionTrajectory {
  std::vector<DiagnosticSample> diagnostics;
  std::vector<std::pair<double, RadialField>> snapshots;
  RadialField final_state;
  double final_time = 0.0;
  int steps = 0;
  int rejected = 0;
  bool reached_floor = false;

  explicit EvolutionTrajectory(RadialField n) : final_state(std::move(n)) {}
};

/// Thrown by step() when the update is not a valid density.
class StepRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// c + phi with either part dropped according to terms.
RadialField drift_potential(const RadialField& c, const Potential& phi, EnergyTerms terms);

/// One backward-Euler step of length dt with the self-consistent potential
/// frozen at c. Zero flux at r = 0 and at R_max.
RadialField step(const RadialField& n, const RadialField& c, const EvolutionConfig& cfg, double dt);

/// Integrates to t_end with step rejection (dt halved on failure, regrown by
/// 1.2 after 50 accepted steps, never above cfg.dt). Validates the config
/// first and throws std::invalid_argument on bad input.
EvolutionTrajectory run(const EvolutionConfig& cfg);

struct DissipationReport {
  /// max |dF/dt + I| / I over the interior samples that were compared.
  double max_defect = 0.0;
  int points = 0;
  /// No sample had I above the floor.
  bool below_floor = false;
};

/// Centered differences of the logged free energy against minus the logged
/// Fisher information, on samples with I above both absolute_floor and
/// relative_floor * max I. Below that, round-off in F divided by the step
/// (about 1e-14 / dt) competes with the O(dt) defect once dt is small.
/// Throws std::invalid_argument on fewer than 3 samples.
DissipationReport dissipation_check(const EvolutionTrajectory& traj, double relative_floor = 1e-1,
                                    double absolute_floor = 1e-13);

struct RateFit {
  DecayFit weighted_l2;
  DecayFit l1;
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Fits the weighted L2 and L1 decay over the window that starts once the
/// weighted L2 distance falls below start_fraction of its initial value and
/// ends at the last sample above floor. Throws std::invalid_argument when the
/// diagnostics carry no reference distances or the window holds < 10 samples.
RateFit fit_rates(const std::vector<DiagnosticSample>& rows, double start_fraction = 1e-3,
                  double floor = 1e-13);

/// diagnostics.csv and snapshots/t_<time>.csv inside dir.
void write_trajectory(const EvolutionTrajectory& traj, const std::string& dir);
void write_diagnostics_csv(const std::vector<DiagnosticSample>& rows, std::ostream& out);

}  // namespace pnp
