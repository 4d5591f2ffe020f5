#pragma once

#include "hylo/tridiagonal.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hylo {

/// Uniform radial mesh on (0, r_max] for radial functions on R^dim.
///
/// Unknowns live on the interior nodes r_i = (i + 1) h, i = 0 .. size() - 1,
/// with h = r_max / n_nodes; the node at r_max carries the Dirichlet value 0.
/// Quadrature is the trapezoid rule with the r^{dim-1} surface weight.
class RadialGrid {
public:
  RadialGrid(int dim, int ell, double r_max, int n_nodes);

  int dim() const { return dim_; }
  int ell() const { return ell_; }
  double r_max() const { return r_max_; }
  int n_nodes() const { return n_nodes_; }
  double h() const { return r_max_ / n_nodes_; }
  /// Number of interior unknowns (n_nodes - 1).
  std::size_t size() const { return static_cast<std::size_t>(n_nodes_ - 1); }

  double r(std::size_t i) const { return static_cast<double>(i + 1) * h(); }
  /// Area of the unit sphere in R^dim.
  double surface_measure() const;
  /// Trapezoid weight of interior node i.
  double weight(std::size_t i) const;
  /// Half-weight of the Dirichlet node at r_max.
  double boundary_weight() const;
  /// Quadrature weights for nodes r_1 .. r_max (size() + 1 entries).
  std::vector<double> quad_weights() const;
  std::vector<double> nodes() const;

  /// Stable 64-bit fingerprint of (dim, ell, r_max, n_nodes).
  std::uint64_t fingerprint() const;
  std::string describe() const;

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

private:
  int dim_;
  int ell_;
  double r_max_;
  int n_nodes_;
};

/// Radial profile u sampled on the interior nodes of a grid.
class Field {
public:
  explicit Field(RadialGrid grid);
  Field(RadialGrid grid, std::vector<double> values);

  const RadialGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Value extrapolated to r = 0: even quadratic fit for ell = 0, zero otherwise.
  double value_at_origin() const;
  /// Piecewise-linear evaluation, zero beyond r_max.
  double interpolate(double r) const;
  /// Linear resampling onto another grid.
  Field resample(const RadialGrid& target) const;

private:
  RadialGrid grid_;
  std::vector<double> values_;
};

void require_same_grid(const RadialGrid& a, const RadialGrid& b, const char* where);

/// Trapezoid approximation of the integral over R^dim of a radial function.
/// Accepts size() interior samples (boundary value taken as 0) or size() + 1
/// samples that include the node at r_max.
double integrate(const RadialGrid& grid, std::span<const double> samples);
double integrate(const Field& f);

/// Weighted inner product sum_i w_i a_i b_i over the interior nodes.
double inner(const Field& a, const Field& b);
double norm(const Field& a);

/// Dual-form (weak) matrices of the discrete radial operators.  For a field u,
/// u^T S u is the discrete Dirichlet energy of grad u, u^T C u the discrete
/// integral of u^2 / r^2, and the mass matrix is diag(w).
SymTridiagonal stiffness_matrix(const RadialGrid& grid);
std::vector<double> centrifugal_weights(const RadialGrid& grid);
/// S + ell^2 C + m2 M, the weak form of L1.
SymTridiagonal l1_matrix(const RadialGrid& grid, double m2);

/// Discrete integral of |grad u|^2.
double dirichlet_form(const Field& u);
/// Discrete integral of u^2 / r^2.
double centrifugal_form(const Field& u);
/// <L1 u, u> = int |grad u|^2 + (ell^2 / r^2 + m2) u^2.
double l1_form(const Field& u, double m2);

/// Strong form of (-Delta_r + ell^2 / r^2 + m2) u.  Symmetric in the weighted
/// inner product: inner(apply_l1(u), v) == inner(apply_l1(v), u).
Field apply_l1(const RadialGrid& grid, double m2, const Field& u);
/// L0 is the identity in the weighted inner product.
Field apply_l0(const RadialGrid& grid, const Field& u);

/// Smallest eigenvalue of the pencil (L1, L0) by shifted inverse iteration.
double rayleigh_min(const RadialGrid& grid, double m2, int max_iters = 500, double tol = 1e-13);

/// CSV with header "r,<column>" and round-trip precision.
void write_field_csv(const Field& u, const std::string& path, const std::string& column = "u");
std::string field_csv(const Field& u, const std::string& column = "u");
/// Reads a two-column CSV written by write_field_csv onto `grid`; node
/// positions must match the grid.
Field read_field_csv(const RadialGrid& grid, const std::string& path);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

}  // namespace hylo
