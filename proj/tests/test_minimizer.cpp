#include "hylo/errors.hpp"
#include "hylo/minimizer.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace hylo;

namespace {

MinimizeConfig config_for(double sigma) {
  MinimizeConfig c;
  c.sigma = sigma;
  c.estimate_c_hat = false;
  return c;
}

}  // namespace

TEST_CASE("reduced energy at the reference test function") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  const Field u = test::ball(ctx.grid(), 10.0);
  const double sigma = test::reference_sigma(ctx);
  const auto f = reduced_energy(ctx, u, sigma);
  CHECK(f.omega == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f.value == doctest::Approx(1295.0).epsilon(2e-2));
  CHECK(f.value == doctest::Approx(functional_j(ctx, u) + 0.25 * functional_k(ctx, u)).epsilon(1e-14));
}

TEST_CASE("reduced energy gradient matches central differences") {
  const FunctionalContext ctx(RadialGrid(3, 0, 20.0, 400), potentials::wref());
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Field u = test::random_field(ctx.grid(), rng);
    const Field v = test::random_field(ctx.grid(), rng, false);
    const double sigma = 100.0;
    const double eps = 1e-5;
    const double fd = (reduced_energy(ctx, test::axpy(u, eps, v), sigma).value -
                       reduced_energy(ctx, test::axpy(u, -eps, v), sigma).value) /
                      (2.0 * eps);
    const double exact = inner(reduced_energy_gradient(ctx, u, sigma), v);
    CHECK(std::abs(fd - exact) / std::abs(exact) < 1e-5);
  }
}

TEST_CASE("reference ground state carries every certificate") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  const double sigma = test::reference_sigma(ctx);
  auto config = config_for(sigma);
  config.keep_trace = true;
  config.estimate_c_hat = true;
  const auto rec = minimize(ctx, config);

  CHECK(rec.omega > 0.0);
  CHECK(rec.omega < 1.0);
  CHECK(rec.lambda_ratio < 1.0);
  CHECK(rec.residual < 1e-8);
  CHECK(std::abs(rec.multiplier - 2.0 * rec.omega) < 1e-6 * rec.omega);
  CHECK(std::abs(rec.charge - sigma) / sigma < 1e-10);
  CHECK(rec.max_charge_error < 1e-10);
  CHECK(rec.frequency_band_ok);
  CHECK(rec.omega < std::sqrt(rayleigh_min(ctx.grid(), 1.0)));
  CHECK(rec.in_sigma_set);
  CHECK(rec.lambda_ratio < rec.c_hat_estimate);
  CHECK(rec.energy == doctest::Approx(energy(ctx, rec.u, rec.omega)).epsilon(1e-12));

  REQUIRE(rec.energy_trace.size() >= 2);
  for (std::size_t i = 1; i < rec.energy_trace.size(); ++i)
    CHECK(rec.energy_trace[i] <= rec.energy_trace[i - 1] + 1e-10 * std::abs(rec.energy_trace[i - 1]));
  CHECK(rec.energy_trace.back() < rec.energy_trace.front());

  for (double x : rec.u.values()) CHECK(x >= 0.0);
}

TEST_CASE("minimize is deterministic") {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 1500), potentials::wref());
  const auto a = minimize(ctx, config_for(500.0));
  const auto b = minimize(ctx, config_for(500.0));
  CHECK(a.iterations == b.iterations);
  CHECK(std::equal(a.u.values().begin(), a.u.values().end(), b.u.values().begin()));
}

TEST_CASE("initial profiles") {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 1500), potentials::wref());
  const double sigma = 500.0;
  SUBCASE("default test function starts at omega = m / 2") {
    const Field u = initial_profile(ctx, InitSpec::test_function(), sigma);
    CHECK(reduced_energy(ctx, u, sigma).omega == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("gaussian and file starts reach the same state") {
    auto g = config_for(sigma);
    g.init = InitSpec::gaussian(4.0);
    const auto from_gaussian = minimize(ctx, g);
    const auto path = (std::filesystem::temp_directory_path() / "hylo_test_init.csv").string();
    write_field_csv(from_gaussian.u, path);
    auto f = config_for(sigma);
    f.init = InitSpec::file(path);
    const auto from_file = minimize(ctx, f);
    std::filesystem::remove(path);
    CHECK(from_file.iterations <= 2);
    const auto from_test = minimize(ctx, config_for(sigma));
    CHECK(test::relative_l2(from_gaussian.u, from_test.u) < 1e-4);
    CHECK(from_gaussian.energy == doctest::Approx(from_test.energy).epsilon(1e-8));
  }
}

TEST_CASE("configuration is validated") {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 600), potentials::wref());
  CHECK_THROWS_AS(minimize(ctx, config_for(-1.0)), PreconditionError);
  auto c = config_for(100.0);
  c.tol_residual = 0.0;
  CHECK_THROWS_AS(minimize(ctx, c), PreconditionError);
  c = config_for(100.0);
  c.max_iters = 0;
  CHECK_THROWS_AS(minimize(ctx, c), PreconditionError);
}

TEST_CASE("non-convergence carries the last state") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  auto c = config_for(test::reference_sigma(ctx));
  c.max_iters = 3;
  try {
    minimize(ctx, c);
    FAIL("expected MinimizeNonConvergence");
  } catch (const MinimizeNonConvergence& e) {
    CHECK(e.last().iterations == 3);
    CHECK(e.last().residual > 1e-8);
    CHECK(e.last().u.size() == ctx.grid().size());
  }
}

TEST_CASE("small charges approach the free band or fail to converge") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  auto c = config_for(1.0);
  c.max_iters = 20000;
  try {
    const auto rec = minimize(ctx, c);
    CHECK((rec.omega > 0.9 || rec.omega_above_mass || !rec.in_sigma_set));
  } catch (const ConvergenceError&) {
    CHECK(true);
  }
}

TEST_CASE("c-hat estimate") {
  SUBCASE("W_ref: below Lambda(u_R, m) and above sqrt(a_inf)") {
    const FunctionalContext ctx(test::reference_grid(), potentials::wref());
    const auto est = estimate_c_hat(ctx);
    CHECK(est.c_hat <= 0.655);
    CHECK(est.c_hat < 1.0);
    if (est.ratio_inf <= 1.0) CHECK(est.c_hat >= std::sqrt(est.ratio_inf) - 1e-12);
    CHECK(est.starts >= 1);
  }
  SUBCASE("W_free: c-hat is m up to the Dirichlet gap") {
    const FunctionalContext ctx(RadialGrid(3, 0, 20.0, 1000), potentials::wfree());
    const auto est = estimate_c_hat(ctx);
    CHECK(est.ratio_inf >= 1.0);
    CHECK(est.c_hat == doctest::Approx(1.0).epsilon(2e-2));
  }
}

TEST_CASE("sigma scan") {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 1500), potentials::wref());
  const auto base = config_for(1.0);
  CHECK(sigma_scan(ctx, {}, base).empty());

  const auto serial = sigma_scan(ctx, {800.0, 400.0, 600.0}, base, 1);
  const auto parallel = sigma_scan(ctx, {600.0, 800.0, 400.0}, base, 3);
  REQUIRE(serial.size() == 3);
  REQUIRE(parallel.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(serial[i].sigma == parallel[i].sigma);
    CHECK(serial[i].omega == parallel[i].omega);
    CHECK(serial[i].status == "converged");
    if (i > 0) CHECK(serial[i].sigma > serial[i - 1].sigma);
  }
}

TEST_CASE("openness: neighbours of a converged charge converge") {
  const FunctionalContext ctx(test::reference_grid(), potentials::wref());
  const double sigma = test::reference_sigma(ctx);
  auto c = config_for(sigma);
  c.c_hat = estimate_c_hat(ctx).c_hat;
  const auto scan = sigma_scan(ctx, {0.99 * sigma, sigma, 1.01 * sigma}, c, 3);
  for (const auto& e : scan) {
    CHECK(e.status == "converged");
    CHECK(e.in_sigma);
  }
}

TEST_CASE("W_free has no hylomorphic states") {
  const FunctionalContext ctx(RadialGrid(3, 0, 20.0, 1000), potentials::wfree());
  auto c = config_for(1.0);
  c.c_hat = 1.0;
  c.max_iters = 3000;
  for (const auto& e : sigma_scan(ctx, {10.0, 100.0}, c, 2)) CHECK_FALSE(e.in_sigma);
}
