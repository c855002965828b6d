// Radial confinement potentials and the admissibility checks run before a solve.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/numerics.hpp"

namespace pnp {

enum class PotentialKind { harmonic, logarithmic, tabulated };

class Potential {
 public:
  /// phi(r) = mu r^2 / 2.
  static Potential harmonic(double mu);
  /// phi(r) = coefficient * log(1 + r).
  static Potential logarithmic(double coefficient);
  /// Samples phi on r_0 = 0 < ... < r_m. Past r_m the potential continues as
  /// phi(r_m) + phi'(r_m) r_m / p ((r / r_m)^p - 1), with p the tail exponent.
  static Potential tabulated(std::vector<double> r, std::vector<double> phi, double tail_exponent);

  PotentialKind kind() const { return kind_; }
  /// mu for the harmonic kind, coefficient for the logarithmic kind.
  double parameter() const { return parameter_; }
  bool is_harmonic() const { return kind_ == PotentialKind::harmonic; }
  /// Largest radius with sampled data; infinite for analytic kinds.
  double valid_range() const;

  double value(double r) const;
  double derivative(double r) const;
  double second_derivative(double r) const;

  RadialField sample(const GridPtr& grid) const;
  std::string describe() const;

 private:
  PotentialKind kind_ = PotentialKind::harmonic;
  double parameter_ = 1.0;
  double tail_exponent_ = 2.0;
  std::shared_ptr<const CubicSpline> table_;
};

struct ConditionResult {
  double margin = 0.0;
  bool passed = false;
};

struct ConditionsReport {
  int dimension = 2;
  double mass = 0.0;
  double probe_radius = 0.0;
  /// inf of phi / log r - d over the probe window.
  ConditionResult c1;
  /// inf of phi / log r - 4 - M / 2pi; only evaluated when d = 2.
  ConditionResult c4;
  bool c4_applies = true;
  /// inf of |phi'|^2 / 4 - Laplacian(phi) / 2 over the probe window.
  ConditionResult sigma;
  /// inf of |phi'| over the probe window.
  ConditionResult grad_inf;
  /// Harmonic potentials: sigma grows like mu^2 r^2 / 4 without bound.
  bool sigma_diverges = false;

  bool all_passed() const;
  std::string to_json() const;
};

/// Margins are infima over the outer 20% of [0, probe_radius], a finite
/// stand-in for the limits at infinity. Throws std::invalid_argument when the
/// probe exceeds the potential's range, probe_radius <= 1.25 or d not in {2,3}.
ConditionsReport check_conditions(const Potential& phi, double mass, int dimension,
                                  double probe_radius);

}  // namespace pnp
