// Functionals of the confined system and their quadratic expansions around a
// stationary state, plus the norms and fits used to measure decay.
//
// Discrete conventions. With U = c + phi and x_i = U_{i+1} - U_i, the face
// flux is F_i = T_i (B(x_i) n_i - B(-x_i) n_{i+1}), B(x) = x / (e^x - 1), and
// the Fisher information is sum_i F_i (log n_i - log n_{i+1} - x_i). Along the
// semi-discrete flow the discrete free energy then decays at exactly that rate.
// Around n_inf the linearized flux uses the face mobility
// D_i = T_i n_i B(log n_i - log n_{i+1}).
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/potentials.hpp"
#include "pnp/stationary.hpp"

namespace pnp {

/// Switches for the confinement and self-interaction parts of the functionals.
struct EnergyTerms {
  bool confinement = true;
  bool coupling = true;
};

/// int n log n + int n phi + (1/2) int n c, with n log n taken as
/// n log max(n, 1e-300).
double free_energy(const RadialField& n, const Potential& phi, EnergyTerms terms = {});

/// Discrete int n |grad(log n + c + phi)|^2. Nonnegative for every n >= 0.
double fisher_information(const RadialField& n, const Potential& phi, EnergyTerms terms = {});

/// SG flux across every face for density n in total potential U.
std::vector<double> face_fluxes(const RadialField& n, const RadialField& U);

/// Face mobilities D_i of the linearization around n_inf.
std::vector<double> face_mobility(const RadialField& n_inf);

/// A radial perturbation n = n_inf (1 + f) with its potential gc = G(f n_inf).
struct Perturbation {
  RadialField f;
  RadialField gc;
};

/// Builds gc from f. Throws std::invalid_argument if int f n_inf exceeds
/// 1e-10 M in magnitude.
Perturbation make_perturbation(RadialField f, const StationaryState& st);

/// Removes the n_inf-weighted mean of f.
RadialField project_zero_mean(const RadialField& f, const StationaryState& st);

/// n_inf (1 + epsilon f) with f projected to zero mean and scaled to sup 1.
/// Throws std::invalid_argument unless 0 < epsilon < 1 and f is nonconstant.
RadialField perturbed_density(const StationaryState& st, const RadialField& f, double epsilon);

/// sum_j xi_j cos(j pi r / R), j = 1..terms, with xi_j uniform in [-1/2, 1/2)
/// from a 64-bit Mersenne twister seeded with seed.
RadialField random_radial_profile(const GridPtr& grid, std::uint64_t seed, int terms = 4);

/// int f^2 n_inf + int n_inf f gc.
double q1(const Perturbation& p, const StationaryState& st);
/// int f^2 n_inf + int |grad gc|^2, the same quantity written with the field energy.
double q1_field_form(const Perturbation& p, const StationaryState& st);
/// int |grad(f + gc)|^2 n_inf.
double q2(const Perturbation& p, const StationaryState& st);
/// int f1 f2 n_inf + int n_inf f1 gc2.
double scalar_product(const Perturbation& a, const Perturbation& b, const StationaryState& st);

/// int (n - n_inf)^2 / n_inf.
double weighted_l2_distance(const RadialField& n, const StationaryState& st);
/// Radial L^p norm of n - n_inf; p = infinity gives the nodal sup.
double lp_distance(const RadialField& n, const StationaryState& st, double p);
/// L^2 norm of grad c - grad c_inf, evaluated on faces.
double grad_c_distance(const RadialField& n, const StationaryState& st);

struct DecayFit {
  double t0 = 0.0;
  double t1 = 0.0;
  double rate = 0.0;
  double prefactor = 0.0;
  /// Coefficient of determination of the log-linear fit.
  double fit_quality = 0.0;
  int samples = 0;
};

/// Least squares of log v against t over samples with t in [t0, t1]; value
/// ~ prefactor e^{-rate t}. Throws std::invalid_argument on fewer than 10
/// samples, t1 <= t0 or a nonpositive value.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& series, double t0, double t1);

}  // namespace pnp
