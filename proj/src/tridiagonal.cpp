#include "hylo/tridiagonal.hpp"

#include "hylo/errors.hpp"

#include <cmath>

namespace hylo {

void SymTridiagonal::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) throw GridMismatchError("tridiagonal multiply: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += off[i - 1] * x[i - 1];
    if (i + 1 < n) acc += off[i] * x[i + 1];
    y[i] = acc;
  }
}

std::vector<double> SymTridiagonal::multiply(std::span<const double> x) const {
  std::vector<double> y(size());
  multiply(x, y);
  return y;
}

std::vector<double> SymTridiagonal::solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw GridMismatchError("tridiagonal solve: size mismatch");
  std::vector<double> c(n), x(rhs.begin(), rhs.end());
  double pivot = diag.empty() ? 0.0 : diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      pivot = diag[i] - off[i - 1] * c[i - 1];
      x[i] -= off[i - 1] * x[i - 1];
    }
    if (pivot == 0.0 || !std::isfinite(pivot)) throw PreconditionError("tridiagonal solve: singular system");
    c[i] = (i + 1 < n) ? off[i] / pivot : 0.0;
    x[i] /= pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

}  // namespace hylo
