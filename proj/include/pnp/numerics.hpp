// Small numerical kernels shared by the solvers.
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnp {

/// Solves a tridiagonal system in place with the Thomas algorithm.
/// lower[i] couples row i to i-1 (lower[0] unused), upper[i] couples row i
/// to i+1 (upper[n-1] unused). Throws std::runtime_error on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// B(x) = x / (e^x - 1), with B(0) = 1.
double bernoulli(double x);

/// Natural or clamped cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
 public:
  CubicSpline() = default;
  /// A NaN slope selects the natural end condition at that end.
  CubicSpline(std::vector<double> x, std::vector<double> y, double slope_left, double slope_right);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t locate(double t) const;
  std::vector<double> x_, y_, m_;  // m_ holds second derivatives
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual(last_residual), iterations(iterations) {}
  double last_residual;
  int iterations;
};

/// Writes to stderr with a "warning: " prefix.
void warn(const std::string& message);

}  // namespace pnp
