#include "pnp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace pnp {

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: size mismatch");
  std::vector<double> c(n), x(n);
  double b = diag[0];
  if (b == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  c[0] = n > 1 ? upper[0] / b : 0.0;
  x[0] = rhs[0] / b;
  for (std::size_t i = 1; i < n; ++i) {
    b = diag[i] - lower[i] * c[i - 1];
    if (b == 0.0 || !std::isfinite(b)) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c[i] = i + 1 < n ? upper[i] / b : 0.0;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / b;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

double bernoulli(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
  if (x > 700.0) return x * std::exp(-x);
  return x / std::expm1(x);
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, double slope_left,
                         double slope_right)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 3 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >= 3 points");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw std::invalid_argument("CubicSpline: abscissae not increasing");

  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
    lo[i] = h0 / 6.0;
    di[i] = (h0 + h1) / 3.0;
    up[i] = h1 / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
  }
  const double hl = x_[1] - x_[0], hr = x_[n - 1] - x_[n - 2];
  if (std::isnan(slope_left)) {
    di[0] = 1.0;
  } else {
    di[0] = hl / 3.0;
    up[0] = hl / 6.0;
    rhs[0] = (y_[1] - y_[0]) / hl - slope_left;
  }
  if (std::isnan(slope_right)) {
    di[n - 1] = 1.0;
  } else {
    lo[n - 1] = hr / 6.0;
    di[n - 1] = hr / 3.0;
    rhs[n - 1] = slope_right - (y_[n - 1] - y_[n - 2]) / hr;
  }
  m_ = solve_tridiagonal(lo, di, up, rhs);
}

std::size_t CubicSpline::locate(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double CubicSpline::operator()(double t) const {
  const std::size_t i = locate(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
  const std::size_t i = locate(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

double CubicSpline::second_derivative(double t) const {
  const std::size_t i = locate(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

}  // namespace pnp
