#include "hylo/errors.hpp"
#include "hylo/shooting.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hylo;

TEST_CASE("no decaying solution at or above the mass") {
  const auto w = potentials::wref();
  const RadialGrid grid(3, 0, 40.0, 4000);
  CHECK_THROWS_AS(shoot(w, 3, 0, 1.0, grid), NoDecayingSolutionError);
  CHECK_THROWS_AS(shoot(w, 3, 0, 1.2, grid), NoDecayingSolutionError);
  CHECK_THROWS_AS(shoot(w, 3, 0, 0.0, grid), NoDecayingSolutionError);
  CHECK_THROWS_AS(shoot(potentials::wfree(), 3, 0, 0.5, grid), NoDecayingSolutionError);
}

TEST_CASE("grid must match the requested symmetry") {
  CHECK_THROWS_AS(shoot(potentials::wref(), 3, 0, 0.9, RadialGrid(2, 0, 40.0, 4000)), GridMismatchError);
  CHECK_THROWS_AS(shoot(potentials::wref(), 2, 1, 0.9, RadialGrid(2, 0, 40.0, 4000)), GridMismatchError);
}

TEST_CASE("ground state at omega = 0.9") {
  const double omega = 0.9;
  const RadialGrid grid(3, 0, 60.0, 6000);
  const auto shot = shoot(potentials::wref(), 3, 0, omega, grid);
  CHECK(shot.residual < 1e-8);
  CHECK(shot.shoot_param > 0.0);
  CHECK(shot.shoot_param < 1.0);
  const Field& u = shot.profile;
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i] <= u[i - 1] + 1e-12);
  for (double x : u.values()) CHECK(x >= 0.0);
  const double kappa = std::sqrt(1.0 - omega * omega);
  CHECK(std::abs(shot.decay_rate - kappa) / kappa < 0.1);
  CHECK(shot.bisection_steps > 10);

  // r u(r) stays bounded along the tail.
  double tail_max = 0.0;
  for (std::size_t i = u.size() / 2; i < u.size(); ++i) tail_max = std::max(tail_max, grid.r(i) * u[i]);
  double peak = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) peak = std::max(peak, grid.r(i) * u[i]);
  CHECK(tail_max <= peak);
}

TEST_CASE("vortex profile vanishes linearly at the origin") {
  const RadialGrid grid(2, 1, 40.0, 4000);
  const auto shot = shoot(potentials::wref(), 2, 1, 0.8, grid);
  CHECK(shot.residual < 1e-8);
  const Field& u = shot.profile;
  const double slope0 = u[0] / grid.r(0);
  const double slope1 = u[9] / grid.r(9);
  CHECK(std::abs(slope1 - slope0) / slope0 < 1e-3);
  CHECK(slope0 == doctest::Approx(shot.shoot_param).epsilon(1e-3));
  CHECK(u.value_at_origin() == 0.0);
}

TEST_CASE("cross-validation against the variational minimizer") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  MinimizeConfig c;
  c.sigma = test::reference_sigma(ctx);
  c.estimate_c_hat = false;
  const auto rec = minimize(ctx, c);
  const auto shot = shoot(potentials::wref(), 3, 0, rec.omega, ctx.grid());

  const auto cv = cross_validate(shot, rec);
  CHECK(cv.comparable);
  CHECK(cv.pass);
  CHECK(cv.l2_distance < 1e-3);
  CHECK(cv.energy_difference < 1e-3);

  SUBCASE("a perturbed profile fails") {
    SolutionRecord bumped = rec;
    for (std::size_t i = 0; i < bumped.u.size(); ++i) {
      const double x = (ctx.grid().r(i) - 5.0) / 2.0;
      bumped.u[i] += 0.1 * std::exp(-x * x);
    }
    CHECK_FALSE(cross_validate(shot, bumped).pass);
  }
  SUBCASE("a frequency mismatch above 5 % is flagged") {
    SolutionRecord shifted = rec;
    shifted.omega = 1.1 * rec.omega;
    const auto bad = cross_validate(shot, shifted);
    CHECK_FALSE(bad.comparable);
    CHECK_FALSE(bad.pass);
  }
  SUBCASE("profiles on a different grid are resampled") {
    const auto coarse = shoot(potentials::wref(), 3, 0, rec.omega, RadialGrid(3, 0, 40.0, 2000));
    CHECK(cross_validate(coarse, rec).l2_distance < 1e-2);
  }
}

TEST_CASE("shooting is deterministic") {
  const RadialGrid grid(3, 0, 40.0, 2000);
  const auto a = shoot(potentials::wref(), 3, 0, 0.7, grid);
  const auto b = shoot(potentials::wref(), 3, 0, 0.7, grid);
  CHECK(a.shoot_param == b.shoot_param);
  CHECK(std::equal(a.profile.values().begin(), a.profile.values().end(), b.profile.values().begin()));
}
