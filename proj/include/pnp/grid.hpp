// Radial grids, shell volumes and sampled radial fields.
//
// A grid discretizes [0, R_max] with nodes r_0 = 0 < r_1 < ... < r_N = R_max.
// Node i owns the dual shell [r_{i-1/2}, r_{i+1/2}] (clipped to [0, R_max]),
// with r_{i+1/2} the midpoint of [r_i, r_{i+1}]. Shell volumes are the exact
// d-dimensional measures of these annuli, so they sum to the ball volume and
// every finite-volume operator built on them conserves mass exactly.
#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pnp {

enum class Spacing { uniform, graded };

struct SpacingSpec {
  Spacing kind = Spacing::uniform;
  double stretch = 1.0;  // ratio h_{i+1}/h_i for graded grids

  static SpacingSpec uniform() { return {Spacing::uniform, 1.0}; }
  static SpacingSpec graded(double stretch) { return {Spacing::graded, stretch}; }
};

/// |S^{d-1}|, the area of the unit sphere in R^d.
double sphere_area(int dimension);

/// Volume of the ball of radius r in R^d.
double ball_volume(int dimension, double r);

class RadialGrid {
 public:
  int dimension() const { return dimension_; }
  /// Number of intervals N; there are N+1 nodes.
  int intervals() const { return static_cast<int>(nodes_.size()) - 1; }
  std::size_t size() const { return nodes_.size(); }
  double r_max() const { return nodes_.back(); }
  const SpacingSpec& spacing() const { return spacing_; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> volumes() const { return volumes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double volume(std::size_t i) const { return volumes_[i]; }

  // Faces are indexed by the interval they bisect: face i sits between
  // nodes i and i+1, for i = 0..N-1.
  double width(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
  double face(std::size_t i) const { return 0.5 * (nodes_[i] + nodes_[i + 1]); }
  double face_area(std::size_t i) const { return face_areas_[i]; }
  /// face_area(i) / width(i); the two-point coupling coefficient of face i.
  double transmissibility(std::size_t i) const { return face_areas_[i] / width(i); }

  double sphere_area() const { return pnp::sphere_area(dimension_); }

 private:
  friend std::shared_ptr<const RadialGrid> make_grid(int, double, int, SpacingSpec);
  RadialGrid(int dimension, std::vector<double> nodes, SpacingSpec spacing);

  int dimension_;
  SpacingSpec spacing_;
  std::vector<double> nodes_;
  std::vector<double> volumes_;
  std::vector<double> face_areas_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Builds a grid with N intervals on [0, r_max]. Throws std::invalid_argument
/// for d outside {2,3}, r_max <= 0, N < 16, or a graded stretch < 1.
GridPtr make_grid(int dimension, double r_max, int intervals, SpacingSpec spacing = {});

/// Regularity class at the origin.
enum class Parity { even, odd };

class RadialField {
 public:
  RadialField(GridPtr grid, std::vector<double> values, Parity parity = Parity::even);

  static RadialField constant(GridPtr grid, double value);
  static RadialField zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }
  static RadialField sample(GridPtr grid, const std::function<double(double)>& f,
                            Parity parity = Parity::even);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Parity parity() const { return parity_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double max() const;
  double min() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  Parity parity_;
};

/// Sum of shell volume times nodal value: the radial realization of an
/// integral over R^d.
double integrate(const RadialField& f);

/// Integral of a pointwise product; both fields must share a grid.
double integrate_product(const RadialField& a, const RadialField& b);

/// Radial L^p norm; p = infinity gives the nodal sup.
double lp_norm(const RadialField& f, double p);

/// Cumulated density. For d = 2 the value at node r_i is
/// Phi(s_i) = (1/2pi) * mass(B(0, r_i)) with s_i = r_i^2; for d = 3 it is the
/// mass of B(0, r_i). Throws std::invalid_argument on negative input.
RadialField cumulated_mass(const RadialField& n);

/// Mass inside each node radius (half of the node's own shell included).
std::vector<double> node_enclosed_mass(const RadialField& n);

bool same_grid(const RadialField& a, const RadialField& b);

/// CSV with header `r,value` and 17 significant digits per number.
void write_csv(const RadialField& f, std::ostream& out);
void write_csv(const RadialField& f, const std::string& path);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_number(double x);

}  // namespace pnp
