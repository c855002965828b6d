// Stationary states of the confined system: Poisson-Boltzmann fixed point on a
// grid, and shooting on the cumulated-density ODE for the harmonic d = 2 case.
#pragma once

#include <string>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/potentials.hpp"

namespace pnp {

struct StationaryState {
  RadialField n_inf;
  RadialField c_inf;
  /// Cumulated density; Phi(s) with s = r^2 when d = 2, enclosed mass when d = 3.
  RadialField Phi;
  Potential potential;
  double mass = 0.0;
  /// Mean of log n + phi + c over nodes where n > 1e-12 max n.
  double lagrange_lambda = 0.0;
  /// sup |log n + phi + c - lambda| over the same nodes.
  double residual = 0.0;
  double free_energy = 0.0;
  int iterations = 0;

  const RadialGrid& grid() const { return n_inf.grid(); }
  const GridPtr& grid_ptr() const { return n_inf.grid_ptr(); }
  int dimension() const { return grid().dimension(); }
};

/// Assembles a state from a density: c = solve_radial(n), then lambda,
/// residual, Phi and the free energy.
StationaryState make_state(RadialField n, const Potential& phi);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-12;
  int max_iterations = 100000;
};

/// Iterates c <- (1-theta) c + theta S(n[c]) with n[c] = M e^{-c-phi} / int e^{-c-phi}
/// until the sup change of c drops below tol. theta is halved (down to 1e-3)
/// whenever the change grows. Throws std::invalid_argument for M <= 0 or bad
/// options and ConvergenceError when max_iterations is exhausted. A failed
/// admissibility check only warns.
StationaryState solve_fixed_point(const Potential& phi, double mass, const GridPtr& grid,
                                  FixedPointOptions opts = {});

struct ShootingSolution {
  double mu = 1.0;
  double mass = 0.0;
  /// Phi'(0).
  double a = 0.0;
  double s_max = 0.0;
  bool converged = false;
  /// |2 pi Phi(s_max) - M| / M.
  double target_mass_error = 0.0;
  /// Samples at s = r_i^2 of the grid passed to solve_shooting.
  GridPtr grid;
  std::vector<double> s;
  std::vector<double> Phi;
  std::vector<double> dPhi;
};

/// The s_max that makes e^{-mu s / 4} fall below 1e-14.
double default_s_max(double mu);

/// Right-hand side of Phi'' = Phi' (Phi / (2s) - mu / 2).
double shooting_second_derivative(double mu, double s, double Phi, double dPhi);

/// Integrates Phi'' + (mu/2) Phi' - Phi Phi' / (2s) = 0 from the series start
/// Phi = a s + (a^2/4 - mu a/4) s^2 and adjusts a so that 2 pi Phi(s_max) = M.
/// s_max <= 0 selects default_s_max(mu). Samples are taken at s = r^2 on the
/// d = 2 grid. Throws std::invalid_argument on bad input and
/// ConvergenceError when no bracket for a is found.
ShootingSolution solve_shooting(double mu, double mass, const GridPtr& grid, double tol = 1e-13,
                                double s_max = 0.0);

/// Integrates the same ODE for a given a and returns Phi(s_end), or +inf if
/// the solution blows up first.
double shoot_mass_function(double mu, double a, double s_end);

/// n(r) = 2 Phi'(r^2). Throws std::invalid_argument for non-converged input.
RadialField reconstruct_density(const ShootingSolution& sol);

/// Writes n_inf.csv, c_inf.csv and meta.json into dir (created if missing).
void write_state(const StationaryState& st, const std::string& dir, const std::string& method);

}  // namespace pnp
