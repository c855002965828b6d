// Linearization around a stationary state and its spectrum.
//
// On angular mode k the perturbation is f(r) Y_k with angular eigenvalue
// kappa = k (k + d - 2). With W = diag(V_i n_inf_i) and w = f + gc:
//   P gc = W f                         (mode-k Poisson, Dirichlet at r = 0 for k >= 1)
//   -L f = W^{-1} K w,  K = L_D + diag(W kappa / r^2)
//   <f1, f2> = f1' W f2 + f1' W gc2,  Q2 = w' K w.
// L_D is the face-mobility Laplacian from diagnostics, so -L is symmetric in
// <.,.> and <f, -L f> = Q2 holds to round-off. For k = 0 the Poisson solve is
// the radial one and perturbations are restricted to zero mean.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/stationary.hpp"

namespace pnp {

class LinearizedOperator {
 public:
  LinearizedOperator(StationaryState base, int k);

  const StationaryState& base() const { return base_; }
  int mode() const { return k_; }
  int dimension() const { return base_.dimension(); }
  double kappa() const { return kappa_; }
  const GridPtr& grid_ptr() const { return base_.grid_ptr(); }

  /// gc for perturbation f on this mode.
  RadialField potential(const RadialField& f) const;
  /// L f. Throws std::invalid_argument for k = 0 when f has nonzero mean.
  RadialField apply(const RadialField& f) const;
  /// Solves -L f = y (y zero-mean when k = 0).
  RadialField solve(const RadialField& y) const;

  double inner(const RadialField& a, const RadialField& b) const;
  double q1(const RadialField& f) const { return inner(f, f); }
  double q2(const RadialField& f) const;

  /// Removes the n_inf-weighted mean (k = 0) or zeroes the origin value (k >= 1).
  RadialField admissible(const RadialField& f) const;
  /// ||-L f - lambda f|| / ||f|| in the Q1 norm.
  double residual(const RadialField& f, double lambda) const;

 private:
  RadialField multiply_weight(const RadialField& f) const;
  void check_mean(const RadialField& f) const;

  StationaryState base_;
  int k_;
  double kappa_;
  double outer_robin_;  // |S^{d-1}| R^{d-2} p, p the exterior decay exponent
  std::vector<double> weight_;    // V_i n_inf_i
  std::vector<double> mobility_;  // D_i
};

RadialField apply_linearized(const LinearizedOperator& op, const RadialField& f);

struct SpectralResult {
  int k = 0;
  double lambda = 0.0;
  RadialField f;
  RadialField gc;
  double residual = 0.0;
  std::string method;

  SpectralResult(int k, double lambda, RadialField f, RadialField gc, double residual, std::string method)
      : k(k), lambda(lambda), f(std::move(f)), gc(std::move(gc)), residual(residual), method(std::move(method)) {}
};

/// Subspace inverse iteration with Rayleigh-Ritz in the Q1 inner product.
/// Returns the n_eigs smallest eigenvalues of -L on the mode, ascending.
/// Throws ConvergenceError if residuals stay above tol.
std::vector<SpectralResult> mode_eigen_matrix(const LinearizedOperator& op, int n_eigs,
                                              std::uint64_t seed = 0, double tol = 1e-9);

// --- radial shooting in the cumulated variable s = r^2 (d = 2, harmonic) ----

struct RadialShooter {
  double mu = 1.0;
  double a = 0.0;  // Phi'(0) of the base state
  double s_max = 0.0;

  /// Coefficient of the slowly decaying branch: phi(s_max) s_max^{lambda/(2 mu)},
  /// for the solution with phi(0) = 0, phi'(0) = 1.
  double functional(double lambda) const;
  /// phi and phi' at the given increasing abscissae.
  void solve(double lambda, const std::vector<double>& s, std::vector<double>& phi,
             std::vector<double>& dphi) const;
};

/// Builds the shooter for a harmonic d = 2 state, re-deriving a from its mass.
RadialShooter make_radial_shooter(const StationaryState& st, double mu);

/// Finds a sign change of the shooting functional on [lo, hi] (scan of 200
/// points) and refines it. Throws ConvergenceError when the sign is constant.
SpectralResult radial_eigen_shoot(const StationaryState& st, double mu, double lo, double hi,
                                  double tol = 1e-12);

/// Samples the shooting functional; used to certify that no eigenvalue lies
/// in a range.
std::vector<double> radial_shooting_scan(const StationaryState& st, double mu, double lo, double hi,
                                         int count);

/// Sup over the grid of the left side of the radial eigen ODE evaluated on
/// phi = s Phi'(s), lambda = 2 mu, with Phi'' and Phi''' taken from the
/// cumulated-density ODE.
double explicit_radial_residual(const StationaryState& st, double mu);

/// Sup relative gap between the shot eigenfunction at lambda = 2 mu and s Phi' / a.
double explicit_radial_profile_error(const StationaryState& st, double mu);

/// f = mu r + c_inf' on the k = 1 mode, with c_inf' from the enclosed mass.
RadialField translation_mode(const StationaryState& st, double mu);

struct GapReport {
  double radial = 0.0;       // smallest eigenvalue, k = 0
  double translation = 0.0;  // smallest eigenvalue, k = 1
  double gap = 0.0;          // min of the two
  double predicted_rate = 0.0;  // 2 gap, the squared-norm decay rate
};

GapReport spectral_gap(const StationaryState& st, double mu);

/// {k, lambda, residual, method}.
std::string to_json(const SpectralResult& r);

}  // namespace pnp
