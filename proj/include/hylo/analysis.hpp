#pragma once

#include "hylo/functionals.hpp"

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

namespace hylo {

/// Piecewise-linear trial profiles with plateau value s0.
///   Ball:    s0 on |x| < R, linear ramp to 0 on [R, R + 1].
///   Annulus: 0 inside R - 1, ramp up on (R - 1, R], s0 on (R, 2R],
///            ramp down on (2R, 2R + 1], 0 beyond (requires R > 1).
struct TestFunctionSpec {
  enum class Shape { Ball, Annulus };
  Shape shape = Shape::Ball;
  double radius = 1.0;
  double s0 = 1.0;

  double support() const { return shape == Shape::Ball ? radius + 1.0 : 2.0 * radius + 1.0; }
  double operator()(double r) const;
};

Field build_test_function(const RadialGrid& grid, const TestFunctionSpec& spec);

struct CertificateEntry {
  double radius = 0.0;
  double ratio = 0.0;          // J / K
  double gradient_share = 0.0; // (int |grad u|^2) / (int u^2 / 2)
};

struct HylomorphyCertificate {
  std::vector<CertificateEntry> entries;
  std::optional<double> first_radius;  // first R with J/K < m2
  /// m2 + 2 N(s0) / s0^2, the large-R limit for the ball.
  double limit_ratio = 0.0;
  bool pass = false;
};

/// J(u_R) / K(u_R) along `radii` (each must fit in the grid).
HylomorphyCertificate hylomorphy_certificate(const FunctionalContext& ctx, TestFunctionSpec spec,
                                             const std::vector<double>& radii);

struct NonexistenceEntry {
  double radius = 0.0;
  double omega = 0.0;   // sigma / int u_R^2
  double energy = 0.0;  // int [|grad u_R|^2 / 2 + W(u_R)] + omega sigma / 2
  double charge = 0.0;
};

/// Energies of fixed-charge states built from u_R with a plateau where W < 0.
/// Requires W(s0) < 0 for the context's s0.
std::vector<NonexistenceEntry> nonexistence_sequence(const FunctionalContext& ctx, double sigma,
                                                     const std::vector<double>& radii);

struct BoostSpec {
  double v = 0.0;
  double gamma = 1.0;
  double omega = 0.0;
  double omega_v = 0.0;
  std::array<double, 3> k_v{};
};

BoostSpec make_boost(double omega, double v);

/// psi_v(t, x) = u(gamma (x1 - v t), x2, x3) exp(i (k_v . x - omega_v t)) for a
/// radial profile u on a dim = 3, ell = 0 grid.  The profile is interpolated
/// with a clamped cubic B-spline (even extension through r = 0).
class BoostedWave {
public:
  BoostedWave(const Field& profile, double omega, double v);

  const BoostSpec& spec() const { return spec_; }
  double profile(double r) const;
  std::complex<double> operator()(double t, const std::array<double, 3>& x) const;

private:
  struct Spline;
  BoostSpec spec_;
  std::shared_ptr<const Spline> spline_;
  double r_end_;
};

BoostedWave lorentz_boost(const Field& profile, double omega, double v);

struct SpacetimeSample {
  double t = 0.0;
  std::array<double, 3> x{};
};

/// Box [0, T] x [-L, L]^3 sampled with `per_axis` points per spatial axis and
/// `time_points` in time.
std::vector<SpacetimeSample> spacetime_box(double T, double L, int per_axis, int time_points);

/// RMS over the samples of |psi_tt - Delta psi + W'(|psi|) psi / |psi|, with
/// second-order centered differences of step `step` in t and each x_i.
double nkg_residual(const BoostedWave& wave, const PotentialSpec& potential,
                    const std::vector<SpacetimeSample>& samples, double step);

/// M = (0, 0, -omega ell int u^2).
std::array<double, 3> angular_momentum(const Field& profile, double omega, int ell);

struct PointwiseBound {
  double lhs = 0.0;  // max u^2 / 2
  double rhs = 0.0;  // sqrt(int u^2 / r^2 * int |grad u|^2) / (2 pi)
  bool holds() const { return lhs <= rhs; }
};

/// Two-dimensional pointwise bound for vortex profiles (dim = 2, ell != 0).
PointwiseBound vortex_pointwise_bound(const Field& profile);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
};

/// Least-squares fit of log y = log c + p log x.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hylo
