#include "hylo/analysis.hpp"
#include "hylo/errors.hpp"
#include "hylo/shooting.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hylo;

TEST_CASE("test function shapes") {
  const TestFunctionSpec ball{TestFunctionSpec::Shape::Ball, 10.0, 1.0};
  CHECK(ball(5.0) == 1.0);
  CHECK(ball(10.5) == doctest::Approx(0.5));
  CHECK(ball(11.2) == 0.0);
  CHECK(ball.support() == 11.0);
  const TestFunctionSpec annulus{TestFunctionSpec::Shape::Annulus, 10.0, 1.0};
  CHECK(annulus(9.5) == doctest::Approx(0.5));
  CHECK(annulus(15.0) == 1.0);
  CHECK(annulus(21.2) == 0.0);
  CHECK(annulus(5.0) == 0.0);
  CHECK(annulus.support() == 21.0);

  CHECK_THROWS_AS(build_test_function(RadialGrid(3, 0, 20.0, 400), annulus), PreconditionError);
  CHECK_THROWS_AS(build_test_function(RadialGrid(3, 0, 10.0, 400), ball), PreconditionError);
}

TEST_CASE("hylomorphy certificate") {
  SUBCASE("W_ref at R = 10") {
    const FunctionalContext ctx(test::reference_grid(), potentials::wref());
    const auto cert = hylomorphy_certificate(ctx, {TestFunctionSpec::Shape::Ball, 10.0, 1.0}, {10.0});
    REQUIRE(cert.entries.size() == 1);
    CHECK(cert.entries[0].ratio == doctest::Approx(0.31).epsilon(0.02 / 0.31));
    CHECK(cert.pass);
    CHECK(cert.first_radius.value() == 10.0);
  }
  SUBCASE("W_free never certifies") {
    const FunctionalContext ctx(test::reference_grid(), potentials::wfree());
    const auto cert = hylomorphy_certificate(ctx, {TestFunctionSpec::Shape::Ball, 1.0, 1.0}, {2.0, 5.0, 10.0, 20.0});
    for (const auto& e : cert.entries) CHECK(e.ratio >= 1.0);
    CHECK_FALSE(cert.pass);
    CHECK_FALSE(cert.first_radius.has_value());
  }
  SUBCASE("gradient share halves when R doubles") {
    const FunctionalContext ctx(RadialGrid(3, 0, 90.0, 9000), potentials::wref());
    const auto cert = hylomorphy_certificate(ctx, {TestFunctionSpec::Shape::Ball, 1.0, 1.0}, {20.0, 40.0});
    const double ratio = cert.entries[1].gradient_share / cert.entries[0].gradient_share;
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.15));
  }
}

TEST_CASE("test-function power laws") {
  const RadialGrid grid(3, 0, 90.0, 9000);
  const FunctionalContext ctx(grid, potentials::wref());
  std::vector<double> radii{10.0, 20.0, 40.0, 80.0}, grad, mass;
  for (double r : radii) {
    const Field u = test::ball(grid, r);
    grad.push_back(dirichlet_form(u));
    mass.push_back(inner(u, u));
  }
  CHECK(fit_power_law(radii, grad).exponent == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit_power_law(radii, mass).exponent == doctest::Approx(3.0).epsilon(0.05));
  const auto exact = fit_power_law({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0});
  CHECK(exact.exponent == doctest::Approx(2.0));
  CHECK(exact.prefactor == doctest::Approx(3.0));
  CHECK_THROWS_AS(fit_power_law({1.0}, {1.0}), PreconditionError);
}

TEST_CASE("non-existence sequence for W_bad") {
  const FunctionalContext ctx(RadialGrid(3, 0, 42.0, 4200), potentials::wbad());
  const double sigma = 100.0;
  const auto seq = nonexistence_sequence(ctx, sigma, {5.0, 10.0, 20.0, 40.0});
  REQUIRE(seq.size() == 4);
  CHECK(seq.back().energy < 0.0);
  for (std::size_t i = 2; i < seq.size(); ++i) CHECK(seq[i].energy < seq[i - 1].energy);
  for (const auto& e : seq) CHECK(e.charge == doctest::Approx(sigma).epsilon(1e-12));

  const FunctionalContext good(RadialGrid(3, 0, 42.0, 4200), potentials::wref());
  CHECK_THROWS_AS(nonexistence_sequence(good, sigma, {5.0}), PreconditionError);
}

TEST_CASE("Lorentz boost kinematics") {
  const auto b = make_boost(0.8, 0.6);
  CHECK(b.gamma == doctest::Approx(1.25));
  CHECK(b.omega_v == doctest::Approx(1.0));
  CHECK(b.k_v[0] == doctest::Approx(0.6));
  CHECK(b.k_v[1] == 0.0);
  CHECK(b.k_v[2] == 0.0);
  for (double v : {0.0, 0.3, 0.6, -0.9}) {
    const auto s = make_boost(0.8, v);
    CHECK(std::abs(s.omega_v * s.omega_v - s.k_v[0] * s.k_v[0] - 0.64) < 1e-12);
  }
  CHECK_THROWS_AS(make_boost(0.8, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_boost(0.8, -1.5), PreconditionError);
}

TEST_CASE("boosted standing waves") {
  const RadialGrid grid(3, 0, 40.0, 4000);
  const double omega = 0.8;
  const auto shot = shoot(potentials::wref(), 3, 0, omega, grid);

  SUBCASE("v = 0 is the standing wave") {
    const BoostedWave wave(shot.profile, omega, 0.0);
    for (double t : {0.0, 0.7}) {
      const std::array<double, 3> x{1.0, 2.0, -0.5};
      const double r = std::sqrt(1.0 + 4.0 + 0.25);
      const auto psi = wave(t, x);
      const auto expected = wave.profile(r) * std::exp(std::complex<double>(0.0, -omega * t));
      CHECK(std::abs(psi - expected) < 1e-14);
    }
    CHECK(wave.profile(grid.r(100)) == doctest::Approx(shot.profile[100]).epsilon(1e-10));
  }
  SUBCASE("residual converges at second order") {
    const auto samples = spacetime_box(2.0, 4.0, 4, 3);
    for (double v : {0.0, 0.3, 0.6}) {
      CAPTURE(v);
      const BoostedWave wave(shot.profile, omega, v);
      const double coarse = nkg_residual(wave, potentials::wref(), samples, 0.1);
      const double fine = nkg_residual(wave, potentials::wref(), samples, 0.05);
      CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.5 / 4.0));
    }
  }
  SUBCASE("wrong profile symmetry") {
    const auto vortex = shoot(potentials::wref(), 2, 1, omega, RadialGrid(2, 1, 40.0, 4000));
    CHECK_THROWS_AS(BoostedWave(vortex.profile, omega, 0.3), PreconditionError);
  }
}

TEST_CASE("angular momentum") {
  const RadialGrid grid(2, 1, 20.0, 400);
  Field u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = grid.r(i) * std::exp(-grid.r(i));
  const double scale = std::sqrt(10.0 / inner(u, u));
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= scale;
  const auto m = angular_momentum(u, 0.8, 1);
  CHECK(m[0] == 0.0);
  CHECK(m[1] == 0.0);
  CHECK(m[2] == doctest::Approx(-8.0).epsilon(1e-12));
  CHECK(angular_momentum(u, 0.8, 0)[2] == 0.0);
  CHECK(angular_momentum(u, 0.8, -1)[2] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("vortex pointwise bound") {
  const auto shot = shoot(potentials::wref(), 2, 1, 0.8, RadialGrid(2, 1, 40.0, 4000));
  const auto bound = vortex_pointwise_bound(shot.profile);
  CHECK(bound.holds());
  CHECK(bound.lhs > 0.0);
  CHECK_THROWS_AS(vortex_pointwise_bound(Field(RadialGrid(3, 0, 10.0, 100))), PreconditionError);
}

TEST_CASE("spacetime box") {
  const auto s = spacetime_box(2.0, 4.0, 4, 3);
  CHECK(s.size() == 4u * 4u * 4u * 3u);
  for (const auto& p : s) {
    CHECK(p.t >= 0.0);
    CHECK(p.t <= 2.0);
    for (double x : p.x) CHECK(std::abs(x) <= 4.0);
  }
}
