#include "hylo/analysis.hpp"
#include "hylo/errors.hpp"
#include "hylo/maxwell.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace hylo;

namespace {

double max_value(const Field& f) { return *std::max_element(f.values().begin(), f.values().end()); }

Field scaled(const Field& u, double a) { return test::axpy(Field(u.grid()), a, u); }

}  // namespace

TEST_CASE("zero source gives zero potential") {
  const RadialGrid grid(3, 0, 20.0, 400);
  const auto g = solve_phi(grid, Field(grid), 0.1);
  for (double x : g.phi_cap.values()) CHECK(x == 0.0);
  CHECK(g.max_q_phi == 0.0);
}

TEST_CASE("gauge bound over random fields and couplings") {
  const RadialGrid grid(3, 0, 30.0, 600);
  std::mt19937_64 rng(31);
  int violations = 0;
  for (int k = 0; k < 50; ++k) {
    const Field u = scaled(test::random_field(grid, rng), 1.0 + 4.0 * k / 50.0);
    for (double q : {1e-3, 1e-2, 1e-1}) {
      const auto g = solve_phi(grid, u, q);
      violations += !(g.max_q_phi < 1.0);
      for (double phi : g.phi_cap.values()) CHECK(q * phi >= 0.0);
      CHECK(g.residual < 1e-10);
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("strong screening keeps the bound strict") {
  const RadialGrid grid(3, 0, 40.0, 4000);
  const Field u = test::ball(grid, 10.0);
  const auto g = solve_phi(grid, u, 2.0);
  CHECK(g.max_q_phi < 1.0);
  CHECK(g.max_q_phi > 0.999);
}

TEST_CASE("linear response at small q") {
  const RadialGrid grid(3, 0, 40.0, 4000);
  const Field u = test::ball(grid, 10.0);
  const double a = max_value(solve_phi(grid, u, 1e-3).phi_cap);
  const double b = max_value(solve_phi(grid, u, 5e-4).phi_cap);
  CHECK(b / a == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("K_q bounds and the q^2 correction") {
  const RadialGrid grid(3, 0, 20.0, 2000);
  const Field u = test::ball(grid, 2.0);
  for (double q : {1e-3, 1e-2, 1e-1}) {
    const FunctionalContext ctx(grid, potentials::wref(), q);
    const double kq = k_q(ctx, u);
    const double k0 = 0.5 * inner(u, u);
    CHECK(kq >= 0.0);
    CHECK(kq <= k0);
    CHECK(screening_correction(grid, u, q) == doctest::Approx(2.0 * (k0 - kq)).epsilon(1e-8));
  }
  const double ratio = screening_correction(grid, u, 2e-2) / screening_correction(grid, u, 1e-2);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("envelope identity: grad K_q matches central differences") {
  const RadialGrid grid(3, 0, 20.0, 400);
  const FunctionalContext ctx(grid, potentials::wref(), 0.05);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 20; ++k) {
    const Field u = test::random_field(grid, rng);
    const Field v = test::random_field(grid, rng, false);
    const double eps = 1e-5;
    const double fd = (k_q(ctx, test::axpy(u, eps, v)) - k_q(ctx, test::axpy(u, -eps, v))) / (2.0 * eps);
    const double exact = inner(grad_k_q(ctx, u), v);
    CHECK(std::abs(fd - exact) / std::abs(exact) < 1e-5);
  }
}

TEST_CASE("gauge energy identity") {
  const RadialGrid grid(3, 0, 40.0, 4000);
  const Field u = test::ball(grid, 10.0);
  for (double q : {1e-3, 1e-1}) {
    const auto id = gauge_energy_identity(grid, u, q, 0.4);
    CHECK(std::abs(id.field_energy - id.coupling_term) / id.coupling_term < 1e-8);
  }
}

TEST_CASE("coupled minimize at vanishing coupling reproduces the uncoupled state") {
  const RadialGrid grid = test::reference_grid();
  const FunctionalContext plain(grid, potentials::wref());
  const FunctionalContext coupled(grid, potentials::wref(), 1e-6);
  MinimizeConfig c;
  c.sigma = test::reference_sigma(plain);
  c.estimate_c_hat = false;
  const auto a = minimize(plain, c);
  const auto b = coupled_minimize(coupled, c);
  CHECK(test::relative_l2(b.u, a.u) < 1e-3);
  CHECK(b.residual_u < 1e-8);
  CHECK(b.residual_phi < 1e-10);
  CHECK(b.gauge.max_q_phi < 1.0);
  CHECK(b.min_omega_eff > 0.0);
  CHECK(std::abs(2.0 * b.omega * k_q(coupled, b.u) - c.sigma) / c.sigma < 1e-10);
}

TEST_CASE("coupled minimize at moderate coupling") {
  const RadialGrid grid = test::reference_grid();
  const FunctionalContext ctx(grid, potentials::wref(), 0.01);
  MinimizeConfig c;
  c.sigma = test::reference_sigma(FunctionalContext(grid, potentials::wref()));
  c.estimate_c_hat = false;
  const auto s = coupled_minimize(ctx, c);
  CHECK(s.residual_u < 1e-8);
  CHECK(s.residual_phi < 1e-10);
  CHECK(s.gauge.max_q_phi < 1.0);
  CHECK(s.min_omega_eff > 0.0);
  const auto res = coupled_residuals(ctx, s.u, s.omega);
  CHECK(res.residual_u == doctest::Approx(s.residual_u));
}

TEST_CASE("preconditions") {
  const RadialGrid grid2(2, 0, 20.0, 400);
  CHECK_THROWS_AS(solve_phi(grid2, Field(grid2), 0.1), PreconditionError);
  const RadialGrid grid(3, 0, 20.0, 400);
  CHECK_THROWS_AS(solve_phi(grid, Field(grid), 0.0), PreconditionError);
  const FunctionalContext plain(grid, potentials::wref());
  CHECK_THROWS_AS(k_q(plain, Field(grid)), PreconditionError);
  MinimizeConfig c;
  c.sigma = 100.0;
  c.estimate_c_hat = false;
  CHECK_THROWS_AS(coupled_minimize(plain, c), PreconditionError);
  const FunctionalContext strong(test::reference_grid(), potentials::wref(), 5.0);
  CHECK_THROWS_AS(coupled_minimize(strong, c), PreconditionError);
}
