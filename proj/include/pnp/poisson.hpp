// Radial Poisson solves -Laplacian(c) = n on R^d with the Green-function
// normalization at the outer radius.
//
// With m_i the mass of shells 0..i, the discrete potential obeys
//   T_i (c_i - c_{i+1}) = m_i,   c_N = beta(R_max) * m_N,
// beta = -log(R)/(2pi) for d = 2 and 1/(4 pi R) for d = 3. The two-point
// Laplacian of c then reproduces n exactly at every interior node.
#pragma once

#include <vector>

#include "pnp/grid.hpp"

namespace pnp {

struct GreenKernel {
  int dimension = 2;

  /// 1/(2pi) for d = 2, 1/(4pi) for d = 3.
  double constant() const;
  /// G_d(r): -(1/2pi) log r or 1/(4 pi r).
  double operator()(double r) const;
};

/// Potential generated by a nonnegative density. Warns on stderr when the
/// outermost shell carries more than 1e-10 of the mass. Throws
/// std::invalid_argument on negative values.
RadialField solve_radial(const RadialField& n);

/// Same operator for a signed source (perturbations); no checks, no warning.
RadialField green_solve(const RadialField& source);

/// c' on faces: entry i is -m_i / A_i, the field between nodes i and i+1.
std::vector<double> face_gradient(const RadialField& source);

/// Two-point discrete -Laplacian, (T_{i-1}(c_i - c_{i-1}) - T_i(c_{i+1} - c_i)) / V_i.
/// The last node has no outer face and uses only the inner flux.
RadialField discrete_laplacian(const RadialField& c);

/// ||n||_1 + d^{d/(d+1)} |S^{d-1}|^{-1/(d+1)} ||n||_{d+1}: an upper bound for
/// the sup of |grad (-Laplacian)^{-1} n|.
double grad_c_sup_bound(const RadialField& n);

}  // namespace pnp
