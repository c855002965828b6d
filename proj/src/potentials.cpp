#include "pnp/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace pnp {

Potential Potential::harmonic(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("harmonic potential: mu must be positive");
  Potential p;
  p.kind_ = PotentialKind::harmonic;
  p.parameter_ = mu;
  return p;
}

Potential Potential::logarithmic(double coefficient) {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient))
    throw std::invalid_argument("logarithmic potential: coefficient must be positive");
  Potential p;
  p.kind_ = PotentialKind::logarithmic;
  p.parameter_ = coefficient;
  return p;
}

Potential Potential::tabulated(std::vector<double> r, std::vector<double> phi, double tail_exponent) {
  if (r.size() < 4 || r.size() != phi.size())
    throw std::invalid_argument("tabulated potential: need at least 4 samples");
  if (r.front() != 0.0) throw std::invalid_argument("tabulated potential: first radius must be 0");
  if (!(tail_exponent > 0.0)) throw std::invalid_argument("tabulated potential: tail exponent must be positive");
  Potential p;
  p.kind_ = PotentialKind::tabulated;
  p.parameter_ = std::numeric_limits<double>::quiet_NaN();
  p.tail_exponent_ = tail_exponent;
  // end slope from the quadratic through the last three samples; the tail
  // continues from it, and a natural end would only be first-order accurate
  const std::size_t m = r.size() - 1;
  const double h1 = r[m] - r[m - 1], h2 = r[m - 1] - r[m - 2];
  const double end_slope = (phi[m] - phi[m - 1]) / h1 + h1 / (h1 + h2) *
                                                              ((phi[m] - phi[m - 1]) / h1 - (phi[m - 1] - phi[m - 2]) / h2);
  // zero slope at the origin keeps the radial profile smooth in R^d
  p.table_ = std::make_shared<const CubicSpline>(std::move(r), std::move(phi), 0.0, end_slope);
  return p;
}

double Potential::valid_range() const {
  return kind_ == PotentialKind::tabulated ? table_->x_max()
                                           : std::numeric_limits<double>::infinity();
}

double Potential::value(double r) const {
  switch (kind_) {
    case PotentialKind::harmonic: return 0.5 * parameter_ * r * r;
    case PotentialKind::logarithmic: return parameter_ * std::log1p(r);
    case PotentialKind::tabulated: {
      const double rm = table_->x_max();
      if (r <= rm) return (*table_)(r);
      const double p = tail_exponent_;
      return (*table_)(rm) + table_->derivative(rm) * rm / p * (std::pow(r / rm, p) - 1.0);
    }
  }
  return 0.0;
}

double Potential::derivative(double r) const {
  switch (kind_) {
    case PotentialKind::harmonic: return parameter_ * r;
    case PotentialKind::logarithmic: return parameter_ / (1.0 + r);
    case PotentialKind::tabulated: {
      const double rm = table_->x_max();
      if (r <= rm) return table_->derivative(r);
      return table_->derivative(rm) * std::pow(r / rm, tail_exponent_ - 1.0);
    }
  }
  return 0.0;
}

double Potential::second_derivative(double r) const {
  switch (kind_) {
    case PotentialKind::harmonic: return parameter_;
    case PotentialKind::logarithmic: return -parameter_ / ((1.0 + r) * (1.0 + r));
    case PotentialKind::tabulated: {
      const double rm = table_->x_max();
      if (r <= rm) return table_->second_derivative(r);
      const double p = tail_exponent_;
      return table_->derivative(rm) * (p - 1.0) / rm * std::pow(r / rm, p - 2.0);
    }
  }
  return 0.0;
}

RadialField Potential::sample(const GridPtr& grid) const {
  return RadialField::sample(grid, [this](double r) { return value(r); });
}

std::string Potential::describe() const {
  switch (kind_) {
    case PotentialKind::harmonic: return "harmonic(mu=" + format_number(parameter_) + ")";
    case PotentialKind::logarithmic: return "logarithmic(coefficient=" + format_number(parameter_) + ")";
    case PotentialKind::tabulated: return "tabulated(range=" + format_number(table_->x_max()) + ")";
  }
  return "";
}

bool ConditionsReport::all_passed() const {
  return c1.passed && sigma.passed && grad_inf.passed && (!c4_applies || c4.passed);
}

std::string ConditionsReport::to_json() const {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const ConditionResult& c) {
    j[key] = {{"margin", c.margin}, {"passed", c.passed}, {"probe_radius", probe_radius}};
  };
  put("C1", c1);
  put("C3_sigma", sigma);
  put("C3_gradient", grad_inf);
  if (c4_applies) put("C4", c4);
  j["sigma_diverges"] = sigma_diverges;
  j["dimension"] = dimension;
  j["mass"] = mass;
  j["all_passed"] = all_passed();
  return j.dump(2);
}

ConditionsReport check_conditions(const Potential& phi, double mass, int dimension,
                                  double probe_radius) {
  if (dimension != 2 && dimension != 3)
    throw std::invalid_argument("check_conditions: dimension must be 2 or 3");
  if (!(probe_radius > 1.25))
    throw std::invalid_argument("check_conditions: probe radius must exceed 1.25");
  if (probe_radius > phi.valid_range())
    throw std::invalid_argument("check_conditions: probe radius beyond tabulated range");
  if (!(mass >= 0.0)) throw std::invalid_argument("check_conditions: negative mass");

  ConditionsReport rep;
  rep.dimension = dimension;
  rep.mass = mass;
  rep.probe_radius = probe_radius;
  rep.c4_applies = dimension == 2;

  constexpr int samples = 201;
  double growth = std::numeric_limits<double>::infinity();
  double sigma = growth, grad = growth;
  for (int k = 0; k < samples; ++k) {
    const double r = probe_radius * (0.8 + 0.2 * k / (samples - 1));
    const double d1 = phi.derivative(r), d2 = phi.second_derivative(r);
    growth = std::min(growth, phi.value(r) / std::log(r));
    sigma = std::min(sigma, 0.25 * d1 * d1 - 0.5 * (d2 + (dimension - 1) * d1 / r));
    grad = std::min(grad, std::abs(d1));
  }
  rep.c1.margin = growth - dimension;
  rep.c4.margin = rep.c4_applies ? growth - 4.0 - mass / (2.0 * std::numbers::pi)
                                 : std::numeric_limits<double>::quiet_NaN();
  rep.sigma.margin = sigma;
  rep.grad_inf.margin = grad;

  if (phi.is_harmonic()) {
    // every liminf is +infinity; the finite-probe margins are informational
    rep.sigma_diverges = true;
    rep.c1.passed = rep.c4.passed = rep.sigma.passed = rep.grad_inf.passed = true;
  } else {
    rep.c1.passed = rep.c1.margin > 0.0;
    rep.c4.passed = rep.c4_applies && rep.c4.margin > 0.0;
    rep.sigma.passed = rep.sigma.margin > 0.0;
    rep.grad_inf.passed = rep.grad_inf.margin > 0.0;
  }
  return rep;
}

}  // namespace pnp
