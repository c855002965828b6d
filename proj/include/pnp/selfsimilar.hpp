// Self-similar change of variables between the free system (no confinement)
// and the harmonically confined one in d = 2:
//   u(t, x) = R^{-2} n(s, x / R),  R = sqrt(1 + 2 mu t),  s = log(R) / mu.
// For mu = 1 the confined time s is log R.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/stationary.hpp"

namespace pnp {

struct SelfSimilarMap {
  double mu = 1.0;

  explicit SelfSimilarMap(double mu);
  double scale(double t) const;            // R(t)
  double confined_time(double t) const;    // s(t)
  double unconfined_time(double s) const;  // inverse of confined_time
};

/// Resamples a positive radial profile f(r / scale) * factor onto target by a
/// cubic spline in log f (zero slope at r = 0; linear log tail past the source
/// range).
RadialField rescale_profile(const RadialField& f, double scale, double factor, const GridPtr& target);

/// n(s, xi) = R^2 u(t, R xi) on target (defaults to u's grid). Throws
/// std::invalid_argument for t < 0 or d != 2.
std::pair<RadialField, double> to_confined(const RadialField& u, double t, const SelfSimilarMap& map,
                                           GridPtr target = nullptr);

/// u(t, x) = R^{-2} n(s, x / R) on target (defaults to n's grid).
std::pair<RadialField, double> to_unconfined(const RadialField& n, double s, const SelfSimilarMap& map,
                                             GridPtr target = nullptr);

/// u_inf(t, x) = R^{-2} n_inf(x / R) and v_inf(t, x) = c_inf(x / R).
std::pair<RadialField, RadialField> self_similar_profile(const StationaryState& st, double t,
                                                         GridPtr target = nullptr);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double fit_quality = 0.0;
  int samples = 0;
};

/// Least squares of log v against log(1 + 2t) over t in [t0, t1]. Throws
/// std::invalid_argument when (1 + 2 t1) / (1 + 2 t0) < 10 or fewer than 10
/// samples fall in the window.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& series, double t0, double t1);

struct AsymptoticsOptions {
  /// Initial center offset of the free-variable datum; the radial solution
  /// is translated by it.
  double offset = 0.5;
  double p = 2.0;
  double q = 4.0;
  int angles = 128;
  /// Fit window in unconfined time.
  double t0 = 25.0;
  double t1 = 5e4;
};

struct NormSeries {
  std::string norm;
  std::vector<std::pair<double, double>> values;  // (t, distance)
  double predicted_exponent = 0.0;
  PowerLawFit fit;
};

struct AsymptoticsReport {
  std::vector<NormSeries> norms;
  /// L1 exponent of the centered (radial) datum alone.
  PowerLawFit radial_l1;
  double t0 = 0.0;
  double t1 = 0.0;

  const NormSeries& find(const std::string& name) const;
  /// [{norm, fitted_exponent, predicted_exponent, window}, ...]
  std::string to_json() const;
};

/// Turns a confined radial trajectory (pairs of confined time and density)
/// into distances between the translated free solution and u_inf, measured in
/// L^1, L^p, and for grad v in L^2 and L^q on R^2, then fits exponents in
/// (1 + 2t). Requires a harmonic base state with mu = 1.
AsymptoticsReport intermediate_asymptotics_check(
    const std::vector<std::pair<double, RadialField>>& confined, const StationaryState& st,
    const AsymptoticsOptions& opts = {});

}  // namespace pnp
