#pragma once

#include <span>
#include <vector>

namespace hylo {

/// Symmetric tridiagonal matrix: diag[i] on the diagonal, off[i] coupling i and i+1.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  explicit SymTridiagonal(std::size_t n = 0) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}

  std::size_t size() const { return diag.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;

  /// Thomas elimination without pivoting; intended for diagonally dominant or
  /// SPD systems.  Throws PreconditionError on a zero pivot.
  std::vector<double> solve(std::span<const double> rhs) const;
};

}  // namespace hylo
