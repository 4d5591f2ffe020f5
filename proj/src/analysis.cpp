#include "hylo/analysis.hpp"

#include "hylo/errors.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hylo {

double TestFunctionSpec::operator()(double r) const {
  r = std::abs(r);
  if (shape == Shape::Ball) {
    if (r < radius) return s0;
    if (r > radius + 1.0) return 0.0;
    return s0 * (1.0 + radius - r);
  }
  if (r <= radius - 1.0 || r >= 2.0 * radius + 1.0) return 0.0;
  if (r <= radius) return s0 * (r - radius + 1.0);
  if (r <= 2.0 * radius) return s0;
  return s0 * (1.0 + 2.0 * radius - r);
}

Field build_test_function(const RadialGrid& grid, const TestFunctionSpec& spec) {
  if (!(spec.radius > 0.0) || !(spec.s0 > 0.0))
    throw PreconditionError("test function: radius and s0 must be positive");
  if (spec.shape == TestFunctionSpec::Shape::Annulus) {
    if (grid.dim() != 2) throw PreconditionError("annulus test function requires dim = 2");
    if (!(spec.radius > 1.0)) throw PreconditionError("annulus test function requires R > 1");
  }
  if (!(spec.support() < grid.r_max())) throw PreconditionError("test function support exceeds r_max");
  Field u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = spec(grid.r(i));
  return u;
}

HylomorphyCertificate hylomorphy_certificate(const FunctionalContext& ctx, TestFunctionSpec spec,
                                             const std::vector<double>& radii) {
  HylomorphyCertificate cert;
  const auto& w = ctx.potential();
  cert.limit_ratio = w.m2() + 2.0 * w.n(spec.s0) / (spec.s0 * spec.s0);
  for (double radius : radii) {
    spec.radius = radius;
    const Field u = build_test_function(ctx.grid(), spec);
    const double k = functional_k(ctx, u);
    CertificateEntry e;
    e.radius = radius;
    e.ratio = functional_j(ctx, u) / k;
    e.gradient_share = dirichlet_form(u) / (0.5 * inner(u, u));
    if (!cert.first_radius && e.ratio < w.m2()) cert.first_radius = radius;
    cert.entries.push_back(e);
  }
  cert.pass = cert.first_radius.has_value();
  return cert;
}

std::vector<NonexistenceEntry> nonexistence_sequence(const FunctionalContext& ctx, double sigma,
                                                     const std::vector<double>& radii) {
  const auto& w = ctx.potential();
  if (!(w.w(w.s0()) < 0.0))
    throw PreconditionError("nonexistence_sequence: requires W(s0) < 0 (positivity must fail at s0)");
  if (!(sigma > 0.0)) throw PreconditionError("nonexistence_sequence: sigma must be positive");
  std::vector<NonexistenceEntry> out;
  for (double radius : radii) {
    const Field u = build_test_function(ctx.grid(), {TestFunctionSpec::Shape::Ball, radius, w.s0()});
    const double mass = inner(u, u);
    NonexistenceEntry e;
    e.radius = radius;
    e.omega = sigma / mass;
    // J already integrates |grad u|^2 / 2 + W(u).
    e.energy = functional_j(ctx, u) + 0.5 * e.omega * sigma;
    e.charge = e.omega * mass;
    out.push_back(e);
  }
  return out;
}

BoostSpec make_boost(double omega, double v) {
  if (!(std::abs(v) < 1.0)) throw PreconditionError("Lorentz boost requires |v| < 1");
  BoostSpec b;
  b.v = v;
  b.gamma = 1.0 / std::sqrt(1.0 - v * v);
  b.omega = omega;
  b.omega_v = b.gamma * omega;
  b.k_v = {b.gamma * omega * v, 0.0, 0.0};
  return b;
}

struct BoostedWave::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> s;
};

BoostedWave::BoostedWave(const Field& profile, double omega, double v) : spec_(make_boost(omega, v)) {
  const auto& g = profile.grid();
  if (g.dim() != 3 || g.ell() != 0) throw PreconditionError("Lorentz boost needs a dim = 3, ell = 0 profile");
  std::vector<double> data;
  data.reserve(g.size() + 2);
  data.push_back(profile.value_at_origin());
  for (double x : profile.values()) data.push_back(x);
  data.push_back(0.0);
  const double h = g.h();
  const double right_slope = -profile[g.size() - 1] / h;
  spline_ = std::make_shared<const Spline>(
      Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(data.begin(), data.end(), 0.0, h, 0.0,
                                                                         right_slope)});
  r_end_ = g.r_max();
}

double BoostedWave::profile(double r) const {
  r = std::abs(r);
  if (r >= r_end_) return 0.0;
  return spline_->s(r);
}

std::complex<double> BoostedWave::operator()(double t, const std::array<double, 3>& x) const {
  const double xi = spec_.gamma * (x[0] - spec_.v * t);
  const double r = std::sqrt(xi * xi + x[1] * x[1] + x[2] * x[2]);
  const double phase = spec_.k_v[0] * x[0] + spec_.k_v[1] * x[1] + spec_.k_v[2] * x[2] - spec_.omega_v * t;
  return profile(r) * std::polar(1.0, phase);
}

BoostedWave lorentz_boost(const Field& profile, double omega, double v) { return BoostedWave(profile, omega, v); }

std::vector<SpacetimeSample> spacetime_box(double T, double L, int per_axis, int time_points) {
  std::vector<SpacetimeSample> out;
  auto axis = [](double lo, double hi, int n, int k) { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); };
  for (int it = 0; it < time_points; ++it)
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        for (int k = 0; k < per_axis; ++k)
          out.push_back({axis(0.0, T, time_points, it),
                         {axis(-L, L, per_axis, i), axis(-L, L, per_axis, j), axis(-L, L, per_axis, k)}});
  return out;
}

double nkg_residual(const BoostedWave& wave, const PotentialSpec& potential,
                    const std::vector<SpacetimeSample>& samples, double step) {
  if (samples.empty()) return 0.0;
  const double inv = 1.0 / (step * step);
  double acc = 0.0;
  for (const auto& s : samples) {
    const auto center = wave(s.t, s.x);
    const auto dtt = (wave(s.t + step, s.x) - 2.0 * center + wave(s.t - step, s.x)) * inv;
    std::complex<double> lap = 0.0;
    for (int d = 0; d < 3; ++d) {
      auto xp = s.x, xm = s.x;
      xp[d] += step;
      xm[d] -= step;
      lap += (wave(s.t, xp) - 2.0 * center + wave(s.t, xm)) * inv;
    }
    const double modulus = std::abs(center);
    const std::complex<double> force = modulus > 0.0 ? potential.w_prime(modulus) * center / modulus : 0.0;
    acc += std::norm(dtt - lap + force);
  }
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::array<double, 3> angular_momentum(const Field& profile, double omega, int ell) {
  return {0.0, 0.0, -omega * ell * inner(profile, profile)};
}

PointwiseBound vortex_pointwise_bound(const Field& profile) {
  const auto& g = profile.grid();
  if (g.dim() != 2 || g.ell() == 0) throw PreconditionError("pointwise bound applies to dim = 2 vortices");
  PointwiseBound b;
  for (double x : profile.values()) b.lhs = std::max(b.lhs, 0.5 * x * x);
  b.rhs = std::sqrt(centrifugal_form(profile) * dirichlet_form(profile)) / (2.0 * std::numbers::pi);
  return b;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_power_law: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw PreconditionError("fit_power_law: data must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  PowerLawFit fit;
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.prefactor = std::exp((sy - fit.exponent * sx) / n);
  return fit;
}

}  // namespace hylo
