#include "hylo/errors.hpp"
#include "hylo/potential.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace hylo;

TEST_CASE("W_ref values") {
  const auto w = potentials::wref();
  CHECK(eval_w(w, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eval_w(w, 0.0) == 0.0);
  CHECK(eval_w(w, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(w.mass() == 1.0);
  CHECK(std::abs(w.n(0.0)) <= 1e-12);
  CHECK(std::abs(w.n_prime(0.0)) <= 1e-12);
}

TEST_CASE("W is undefined for negative arguments") {
  const auto w = potentials::wref();
  CHECK_THROWS_AS(w.w(-0.1), DomainError);
  CHECK_THROWS_AS(w.w_prime(-0.1), DomainError);
}

TEST_CASE("W'(s) matches central differences of W") {
  const auto w = potentials::wref();
  for (double s : {0.1, 0.7, 1.3, 2.9}) {
    const double eps = 1e-6;
    const double fd = (w.w(s + eps) - w.w(s - eps)) / (2.0 * eps);
    CHECK(fd == doctest::Approx(w.w_prime(s)).epsilon(1e-8));
  }
}

TEST_CASE("assumption report for the built-in potentials") {
  SUBCASE("W_ref passes everything with omega0 = 0") {
    const auto r = check_assumptions(potentials::wref(), 10.0);
    CHECK(r.all_pass());
    CHECK(r.hylomorphy.witness == doctest::Approx(-0.5));
    CHECK(r.omega0 == doctest::Approx(0.0));
  }
  SUBCASE("W_bad fails positivity at s0 = 2 where W = -2") {
    const auto w = potentials::wbad();
    const auto r = check_assumptions(w, 20.0);
    CHECK_FALSE(r.w_positive.pass);
    CHECK(r.w_positive.witness == doctest::Approx(2.0));
    CHECK(eval_w(w, 2.0) == doctest::Approx(-2.0));
  }
  SUBCASE("W_free fails hylomorphy with omega0 = m") {
    const auto r = check_assumptions(potentials::wfree(), 10.0);
    CHECK_FALSE(r.hylomorphy.pass);
    CHECK(r.omega0 == doctest::Approx(1.0));
  }
}

TEST_CASE("omega0 <= m, strictly iff hylomorphy holds") {
  for (const auto& w : {potentials::wref(), potentials::wbad(), potentials::wfree()}) {
    const auto r = check_assumptions(w, 10.0 * w.s0());
    CHECK(r.omega0 <= w.mass() + 1e-12);
    CHECK((r.omega0 < w.mass() - 1e-9) == r.hylomorphy.pass);
  }
}

TEST_CASE("nondegeneracy: W(s)/s^2 -> m2/2") {
  const auto w = potentials::polynomial({{3, -2.0}, {4, 1.0}}, 4.0, 1.0);
  for (double s : {1e-4, 1e-5}) CHECK(std::abs(w.w(s) / (s * s) / 2.0 - 1.0) < 1e-2);
}

TEST_CASE("truncation of W_ref at s1 = 1.5") {
  const auto w = potentials::wref();
  const auto t = truncate(w, 1.5);
  CHECK(t.n(1.5) == w.n(1.5));
  CHECK(t.n(1.5) == doctest::Approx(-0.84375));
  CHECK(t.n(2.0) == doctest::Approx(-0.84375));
  CHECK(t.n(7.0) == doctest::Approx(-0.84375));
  CHECK(t.n_prime(2.0) == doctest::Approx(0.0));
  for (int k = 0; k <= 150; ++k) {
    const double s = 0.01 * k;
    CHECK(t.n(s) == w.n(s));
    CHECK(t.n_prime(s) == w.n_prime(s));
  }
}

TEST_CASE("truncation requires N'(s1) >= 0") { CHECK_THROWS_AS(truncate(potentials::wref(), 0.5), PreconditionError); }

TEST_CASE("construction rejects inconsistent evaluators") {
  auto n = [](double s) { return -s * s * s; };
  auto wrong = [](double s) { return -2.0 * s * s; };
  CHECK_THROWS_AS(PotentialSpec("bad", 1.0, n, wrong, 1.0), PreconditionError);
  CHECK_THROWS_AS(PotentialSpec("offset", 1.0, [](double s) { return 1.0 + s * s * s; },
                                [](double s) { return 3.0 * s * s; }, 1.0),
                  PreconditionError);
  CHECK_THROWS_AS(PotentialSpec("massless", 0.0, n, [](double s) { return -3.0 * s * s; }, 1.0),
                  PreconditionError);
}

TEST_CASE("polynomial degrees must be at least 3") {
  CHECK_THROWS_AS(potentials::polynomial({{2, 1.0}}, 1.0, 1.0), ConfigError);
}

TEST_CASE("potential file parsing") {
  SUBCASE("polynomial equivalent to W_ref") {
    const auto p = potentials::parse("kind = polynomial\n# W_ref\nm2 = 1\ns0 = 1\ns1 = 1.5\np = 4\n"
                                     "coefficients = 3:-1, 4:0.5\n");
    const auto w = potentials::wref();
    for (double s : {0.0, 0.3, 1.0, 2.5}) CHECK(p.w(s) == doctest::Approx(w.w(s)).epsilon(1e-14));
    CHECK(p.s1().value() == 1.5);
    CHECK(p.growth_exponent().value() == 4.0);
  }
  SUBCASE("builtin reference") { CHECK(potentials::parse("kind=builtin\nname=wbad\n").name() == "wbad"); }
  SUBCASE("errors") {
    CHECK_THROWS_AS(potentials::parse("kind=polynomial\nm2=1\n"), ConfigError);
    CHECK_THROWS_AS(potentials::parse("kind=polynomial\nm2=x\ns0=1\ncoefficients=3:1\n"), ConfigError);
    CHECK_THROWS_AS(potentials::parse("kind=polynomial\nm2=1\ns0=1\ncoefficients=2:1\n"), ConfigError);
    CHECK_THROWS_AS(potentials::parse("kind=spline\n"), ConfigError);
    CHECK_THROWS_AS(potentials::parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(potentials::builtin("nope"), ConfigError);
    CHECK_THROWS_AS(potentials::resolve("/nonexistent/potential.txt"), ConfigError);
  }
  SUBCASE("resolve reads files") {
    const auto path = std::filesystem::temp_directory_path() / "hylo_test_potential.txt";
    std::ofstream(path) << "kind = polynomial\nm2 = 2\ns0 = 1\ncoefficients = 3:-1, 4:0.5\n";
    const auto p = potentials::resolve(path.string());
    CHECK(p.m2() == 2.0);
    std::filesystem::remove(path);
  }
}

TEST_CASE("check_assumptions preconditions") {
  CHECK_THROWS_AS(check_assumptions(potentials::wref(), 0.5), PreconditionError);
  CHECK_THROWS_AS(check_assumptions(potentials::wref(), 10.0, 50), PreconditionError);
}
