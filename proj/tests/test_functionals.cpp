#include "hylo/errors.hpp"
#include "hylo/maxwell.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hylo;

namespace {

/// Worst relative error of <grad f(u), v> against central differences over `directions` random v.
template <class F, class G>
double gradient_error(const FunctionalContext& ctx, F value, G gradient, std::uint64_t seed, int directions) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    const Field u = test::random_field(ctx.grid(), rng);
    const Field v = test::random_field(ctx.grid(), rng, false);
    const double eps = 1e-5;
    const double fd = (value(ctx, test::axpy(u, eps, v)) - value(ctx, test::axpy(u, -eps, v))) / (2.0 * eps);
    const double exact = inner(gradient(ctx, u), v);
    worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
  }
  return worst;
}

}  // namespace

TEST_CASE("J and K at the reference test function") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  const Field u = test::ball(ctx.grid(), 10.0);
  const double j = functional_j(ctx, u);
  const double k = functional_k(ctx, u);
  CHECK(j == doctest::Approx(716.3).epsilon(2e-2));
  CHECK(k == doctest::Approx(2314.6).epsilon(1e-2));
  CHECK(j / k < 1.0);

  const double omega = std::sqrt(j / k);
  CHECK(omega == doctest::Approx(0.5563).epsilon(2e-2));
  CHECK(hylomorphy_ratio(ctx, u, omega) == doctest::Approx(omega).epsilon(1e-12));
}

TEST_CASE("zero field") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  const Field zero(ctx.grid());
  CHECK(functional_j(ctx, zero) == 0.0);
  CHECK(functional_k(ctx, zero) == 0.0);
  for (double g : grad_j(ctx, zero).values()) CHECK(g == 0.0);
  CHECK_THROWS_AS(hylomorphy_ratio(ctx, zero, 0.5), PreconditionError);
}

TEST_CASE("J is nonnegative for nonnegative fields under W_ref") {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 600), potentials::wref());
  std::mt19937_64 rng(21);
  for (int k = 0; k < 100; ++k) {
    const Field u = test::random_field(ctx.grid(), rng);
    CHECK(functional_j(ctx, u) >= 0.0);
    CHECK(functional_k(ctx, u) >= 0.0);
  }
}

TEST_CASE("E, H and Lambda identities") {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 600), potentials::wref());
  std::mt19937_64 rng(5);
  const Field u = test::random_field(ctx.grid(), rng);
  std::vector<double> sq(u.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = u[i] * u[i];
  const double j = functional_j(ctx, u);
  const double k = functional_k(ctx, u);
  for (double omega : {0.1, 0.5, 0.9}) {
    CHECK(charge(ctx, u, omega) == doctest::Approx(omega * integrate(ctx.grid(), sq)).epsilon(1e-12));
    const double h = charge(ctx, u, omega);
    CHECK(energy(ctx, u, omega) == doctest::Approx(hylomorphy_ratio(ctx, u, omega) * h).epsilon(1e-12));
    CHECK(energy_breakdown(ctx, u, omega).total() == doctest::Approx(energy(ctx, u, omega)).epsilon(1e-12));
  }
  CHECK(energy(ctx, u, 1e-9) == doctest::Approx(j).epsilon(1e-12));

  // Lambda(u, .) is minimized at sqrt(J / K) with value sqrt(J / K).
  const double star = std::sqrt(j / k);
  const double best = hylomorphy_ratio(ctx, u, star);
  CHECK(best == doctest::Approx(star).epsilon(1e-12));
  for (int n = 1; n <= 50; ++n) CHECK(best <= hylomorphy_ratio(ctx, u, 0.04 * n) + 1e-15);
  CHECK_THROWS_AS(hylomorphy_ratio(ctx, u, 0.0), PreconditionError);
}

TEST_CASE("H = sigma and Lambda < m imply E < m sigma") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  const Field u = test::ball(ctx.grid(), 10.0);
  const double sigma = test::reference_sigma(ctx);
  const double omega = sigma / (2.0 * functional_k(ctx, u));
  CHECK(charge(ctx, u, omega) == doctest::Approx(sigma).epsilon(1e-14));
  REQUIRE(hylomorphy_ratio(ctx, u, omega) < 1.0);
  CHECK(energy(ctx, u, omega) < sigma);
}

TEST_CASE("grad K is the identity at q = 0") {
  const FunctionalContext ctx(RadialGrid(2, 1, 20.0, 400), potentials::wref());
  std::mt19937_64 rng(9);
  const Field u = test::random_field(ctx.grid(), rng, false);
  const Field g = grad_k(ctx, u);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(g[i] == u[i]);
}

TEST_CASE("gradients match central differences") {
  const RadialGrid grid(3, 0, 20.0, 400);
  for (double q : {0.0, 0.05}) {
    CAPTURE(q);
    const FunctionalContext ctx(grid, potentials::wref(), q);
    CHECK(gradient_error(ctx, functional_j, grad_j, 1, 20) < 1e-5);
    CHECK(gradient_error(ctx, functional_k, grad_k, 2, 20) < 1e-5);
  }
  const FunctionalContext vortex(RadialGrid(2, 1, 20.0, 400), potentials::wref());
  CHECK(gradient_error(vortex, functional_j, grad_j, 3, 20) < 1e-5);
}

TEST_CASE("coupling is three-dimensional and nonnegative") {
  CHECK_THROWS_AS(FunctionalContext(RadialGrid(2, 0, 10.0, 100), potentials::wref(), 0.1), PreconditionError);
  CHECK_THROWS_AS(FunctionalContext(RadialGrid(3, 0, 10.0, 100), potentials::wref(), -0.1), PreconditionError);
}

TEST_CASE("functionals reject fields from another grid") {
  const FunctionalContext ctx(RadialGrid(3, 0, 10.0, 100), potentials::wref());
  const Field other(RadialGrid(3, 0, 10.0, 200));
  CHECK_THROWS_AS(functional_j(ctx, other), GridMismatchError);
  CHECK_THROWS_AS(grad_j(ctx, other), GridMismatchError);
}
