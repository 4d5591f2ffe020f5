#include "hylo/verify.hpp"

#include "hylo/analysis.hpp"
#include "hylo/maxwell.hpp"
#include "hylo/minimizer.hpp"
#include "hylo/shooting.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace hylo {

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string name;
  double time_limit;
  bool extended;
  std::function<Outcome(double)> run;  // argument: tolerance scale
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

RadialGrid reference_grid() { return RadialGrid(3, 0, 40.0, 4000); }

/// sigma = H(u_R, 1/2) for the ball of radius 10.
double reference_sigma(const FunctionalContext& ctx) {
  const Field u = build_test_function(ctx.grid(), {TestFunctionSpec::Shape::Ball, 10.0, ctx.potential().s0()});
  return 2.0 * 0.5 * functional_k(ctx, u);
}

MinimizeConfig quick_config(double sigma) {
  MinimizeConfig c;
  c.sigma = sigma;
  c.estimate_c_hat = false;
  return c;
}

double relative_l2(const Field& a, const Field& b) {
  Field d(a.grid());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return norm(d) / norm(b);
}

/// J(u_R) and K(u_R) for the ball by exact piecewise integration in r:
/// plateau in closed form, the unit ramp by 20-point Gauss-Legendre (exact
/// for the polynomial integrands of polynomial potentials).
struct BallOracle {
  double k;
  double j;
};

BallOracle ball_oracle(const PotentialSpec& w, double radius) {
  using boost::math::quadrature::gauss;
  const double s0 = w.s0();
  const double four_pi = 4.0 * std::numbers::pi;
  auto ramp = [&](auto f) {
    return gauss<double, 20>::integrate([&](double t) { return f(t) * (radius + 1.0 - t) * (radius + 1.0 - t); },
                                        0.0, 1.0);
  };
  const double plateau = radius * radius * radius / 3.0;
  const double mass = four_pi * (s0 * s0 * plateau + ramp([&](double t) { return s0 * s0 * t * t; }));
  const double grad = four_pi * ramp([&](double) { return s0 * s0; });
  const double nonlinear = four_pi * (w.n(s0) * plateau + ramp([&](double t) { return w.n(s0 * t); }));
  const double k = 0.5 * mass;
  return {k, 0.5 * grad + w.m2() * k + nonlinear};
}

Field random_bumps(const RadialGrid& grid, std::mt19937_64& rng, double amp_lo, double amp_hi) {
  std::uniform_real_distribution<double> amp(amp_lo, amp_hi), centre(0.0, 0.5 * grid.r_max()),
      width(1.0, 0.3 * grid.r_max());
  Field u(grid);
  for (int k = 0; k < 3; ++k) {
    const double a = amp(rng), c = centre(rng), s = width(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = (grid.r(i) - c) / s;
      u[i] += a * std::exp(-x * x);
    }
  }
  return u;
}

Outcome multiplier_identity(double tol) {
  const FunctionalContext ctx(reference_grid(), potentials::wref());
  const auto rec = minimize(ctx, quick_config(reference_sigma(ctx)));
  const double err = std::abs(rec.multiplier - 2.0 * rec.omega) / rec.omega;
  return {err < 1e-6 * tol, "|lambda - 2 omega| / omega = " + fmt(err) + " (omega = " + fmt(rec.omega) + ")"};
}

Outcome frequency_band(double) {
  const FunctionalContext ctx(reference_grid(), potentials::wref());
  const double sigma = reference_sigma(ctx);
  MinimizeConfig base = quick_config(sigma);
  const auto scan = sigma_scan(ctx, {0.25 * sigma, 0.5 * sigma, sigma, 2.0 * sigma, 4.0 * sigma}, base);
  const double band = std::sqrt(rayleigh_min(ctx.grid(), ctx.potential().m2()));
  bool ok = true;
  std::ostringstream d;
  d << "sqrt(rayleigh_min) = " << fmt(band) << "; omega:";
  for (const auto& e : scan) {
    const bool conv = e.status == "converged";
    ok = ok && conv && e.omega > 0.0 && e.omega < band;
    d << ' ' << (conv ? fmt(e.omega) : e.status);
  }
  return {ok, d.str()};
}

Outcome hylomorphy_ratio_check(double tol) {
  const FunctionalContext ctx(reference_grid(), potentials::wref());
  const auto cert = hylomorphy_certificate(ctx, {TestFunctionSpec::Shape::Ball, 10.0, 1.0}, {10.0});
  const double ratio = cert.entries.front().ratio;
  const auto oracle = ball_oracle(ctx.potential(), 10.0);
  const double exact = oracle.j / oracle.k;
  const bool ok = std::abs(ratio - 0.31) <= 0.02 * tol && std::abs(exact - 0.31) <= 0.02 * tol && ratio < 1.0;
  return {ok, "J/K discrete = " + fmt(ratio) + ", closed form = " + fmt(exact)};
}

Outcome oracle_equivalence(double tol) {
  const FunctionalContext ctx(reference_grid(), potentials::wref());
  const auto rec = minimize(ctx, quick_config(reference_sigma(ctx)));
  const auto shot = shoot(ctx.potential(), 3, 0, rec.omega, ctx.grid());
  const auto cv = cross_validate(shot, rec);
  const bool ok = cv.comparable && cv.l2_distance < 1e-2 * tol && cv.energy_difference < 1e-2 * tol;
  return {ok, "L2 distance = " + fmt(cv.l2_distance) + ", energy difference = " + fmt(cv.energy_difference)};
}

Outcome gradient_suites(double tol) {
  std::mt19937_64 rng(20240501);
  const RadialGrid grid(3, 0, 20.0, 400);
  double worst = 0.0;
  std::ostringstream d;
  for (double q : {0.0, 0.05}) {
    const FunctionalContext ctx(grid, potentials::wref(), q);
    const Field u = random_bumps(grid, rng, 0.2, 1.2);
    const Field gj = grad_j(ctx, u), gk = grad_k(ctx, u);
    double wj = 0.0, wk = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Field v = random_bumps(grid, rng, -1.0, 1.0);
      const double eps = 1e-5;
      Field up(grid), um(grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        up[i] = u[i] + eps * v[i];
        um[i] = u[i] - eps * v[i];
      }
      auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(std::abs(an), 1e-300); };
      wj = std::max(wj, rel((functional_j(ctx, up) - functional_j(ctx, um)) / (2 * eps), inner(gj, v)));
      wk = std::max(wk, rel((functional_k(ctx, up) - functional_k(ctx, um)) / (2 * eps), inner(gk, v)));
    }
    worst = std::max({worst, wj, wk});
    d << "q=" << q << ": J " << fmt(wj) << ", K " << fmt(wk) << "; ";
  }
  return {worst < 1e-5 * tol, d.str() + "worst relative error " + fmt(worst)};
}

Outcome gauge_bound(double) {
  std::mt19937_64 rng(7);
  const RadialGrid grid(3, 0, 30.0, 600);
  int violations = 0, solves = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Field u = random_bumps(grid, rng, 0.1, 5.0);
    for (double q : {1e-3, 1e-2, 1e-1}) {
      ++solves;
      try {
        const auto g = solve_phi(grid, u, q);
        worst = std::max(worst, g.max_q_phi);
        if (!(g.max_q_phi < 1.0)) ++violations;
      } catch (const Error&) {
        ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(solves) +
                               " solves; max q Phi = " + fmt(worst)};
}

Outcome q_squared_scaling(double tol) {
  const RadialGrid grid(3, 0, 20.0, 2000);
  const Field u = build_test_function(grid, {TestFunctionSpec::Shape::Ball, 2.0, 1.0});
  std::vector<double> qs, cs;
  for (int k = 0; k < 5; ++k) {
    const double q = std::pow(10.0, -3.0 + 0.5 * k);
    qs.push_back(q);
    cs.push_back(screening_correction(grid, u, q));
  }
  const auto fit = fit_power_law(qs, cs);
  return {std::abs(fit.exponent - 2.0) <= 0.1 * tol, "slope = " + fmt(fit.exponent)};
}

Outcome nkgm_consistency(double tol) {
  const RadialGrid grid = reference_grid();
  const FunctionalContext plain(grid, potentials::wref());
  const FunctionalContext coupled(grid, potentials::wref(), 1e-6);
  const double sigma = reference_sigma(plain);
  const auto rec = minimize(plain, quick_config(sigma));
  const auto sol = coupled_minimize(coupled, quick_config(sigma));
  const double dist = relative_l2(sol.u, rec.u);
  const bool ok = dist < 1e-3 * tol && sol.residual_u < 1e-7 * tol && sol.residual_phi < 1e-7 * tol;
  return {ok, "L2 distance = " + fmt(dist) + ", residual_u = " + fmt(sol.residual_u) +
                  ", residual_phi = " + fmt(sol.residual_phi)};
}

Outcome nonexistence_trend(double) {
  const FunctionalContext ctx(RadialGrid(3, 0, 42.0, 4200), potentials::wbad());
  const auto seq = nonexistence_sequence(ctx, 100.0, {5.0, 10.0, 20.0, 40.0});
  const bool ok = seq[3].energy < 0.0 && seq[3].energy < seq[2].energy && seq[2].energy < seq[1].energy;
  std::ostringstream d;
  d << "E:";
  for (const auto& e : seq) d << ' ' << fmt(e.energy);
  return {ok, d.str()};
}

Outcome vortex(double tol) {
  const FunctionalContext ctx(RadialGrid(2, 1, 40.0, 4000), potentials::wref());
  const Field trial = build_test_function(ctx.grid(), {TestFunctionSpec::Shape::Annulus, 10.0, 1.0});
  const double sigma = 2.0 * 0.5 * functional_k(ctx, trial);
  const auto rec = minimize(ctx, quick_config(sigma));
  const double peak = *std::max_element(rec.u.values().begin(), rec.u.values().end());
  const double origin_ratio = rec.u[0] / peak;

  const Field gj = grad_j(ctx, rec.u);
  Field res(ctx.grid());
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = gj[i] - rec.omega * rec.omega * rec.u[i];
  const double residual = norm(res) / norm(gj);

  const double mz = angular_momentum(rec.u, rec.omega, 1)[2];
  std::vector<double> sq(rec.u.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = rec.u[i] * rec.u[i];
  const double mz_quad = -rec.omega * integrate(ctx.grid(), sq);
  const double mz_err = std::abs(mz - mz_quad) / std::abs(mz_quad);
  const auto bound = vortex_pointwise_bound(rec.u);

  const bool ok = origin_ratio < 1e-2 && residual < 1e-7 * tol && mz_err < 1e-10 * tol && bound.holds();
  return {ok, "u(r1)/max u = " + fmt(origin_ratio) + ", residual = " + fmt(residual) + ", M_z error = " +
                  fmt(mz_err) + ", bound " + fmt(bound.lhs) + " <= " + fmt(bound.rhs)};
}

struct BoostOrders {
  double coarse;
  double fine;
  double ratio() const { return coarse / fine; }
};

BoostOrders boost_orders(const Field& profile, double omega, double v, double step) {
  const BoostedWave wave(profile, omega, v);
  const auto samples = spacetime_box(2.0, 4.0, 4, 3);
  return {nkg_residual(wave, potentials::wref(), samples, step),
          nkg_residual(wave, potentials::wref(), samples, 0.5 * step)};
}

Outcome boost_residual(double tol) {
  const RadialGrid grid = reference_grid();
  const double omega = 0.8;
  const auto shot = shoot(potentials::wref(), 3, 0, omega, grid);
  const auto orders = boost_orders(shot.profile, omega, 0.6, 0.1);
  const auto spec = make_boost(omega, 0.6);
  const double dispersion =
      std::abs(spec.omega_v * spec.omega_v - spec.k_v[0] * spec.k_v[0] - spec.k_v[1] * spec.k_v[1] -
               spec.k_v[2] * spec.k_v[2] - omega * omega);
  const bool ok = std::abs(orders.ratio() - 4.0) <= 0.5 * tol && dispersion < 1e-12 * tol;
  return {ok, "residual " + fmt(orders.coarse) + " -> " + fmt(orders.fine) + ", ratio = " + fmt(orders.ratio()) +
                  ", dispersion error = " + fmt(dispersion)};
}

Outcome truncation_safety(double tol) {
  const RadialGrid grid = reference_grid();
  const FunctionalContext plain(grid, potentials::wref());
  const FunctionalContext cut(grid, truncate(potentials::wref(), 1.5));
  const double sigma = reference_sigma(plain);
  const auto a = minimize(cut, quick_config(sigma));
  const auto b = minimize(plain, quick_config(sigma));
  const double peak = *std::max_element(a.u.values().begin(), a.u.values().end());
  const double dist = relative_l2(a.u, b.u);
  bool ok = a.omega < 1.0 && peak <= 1.5 + 1e-6 * tol;
  if (peak < 1.5) ok = ok && dist < 1e-8 * tol;
  return {ok, "max u = " + fmt(peak) + ", distance to untruncated = " + fmt(dist)};
}

Outcome openness(double) {
  const FunctionalContext ctx(reference_grid(), potentials::wref());
  const double c_hat = estimate_c_hat(ctx).c_hat;
  const double sigma = reference_sigma(ctx);
  MinimizeConfig cfg = quick_config(sigma);
  cfg.c_hat = c_hat;
  const auto centre = minimize(ctx, cfg);
  if (!(centre.lambda_ratio < c_hat * (1.0 - kSigmaSetMargin)))
    return {false, "sigma* not below the c-hat margin: Lambda = " + fmt(centre.lambda_ratio)};
  std::ostringstream d;
  d << "c_hat = " << fmt(c_hat) << "; Lambda(sigma*) = " << fmt(centre.lambda_ratio);
  bool ok = true;
  for (double f : {0.99, 1.01}) {
    cfg.sigma = f * sigma;
    try {
      const auto rec = minimize(ctx, cfg);
      ok = ok && rec.lambda_ratio < c_hat;
      d << ", Lambda(" << f << " sigma*) = " << fmt(rec.lambda_ratio);
    } catch (const ConvergenceError& e) {
      ok = false;
      d << ", " << f << " sigma*: " << e.what();
    }
  }
  return {ok, d.str()};
}

Outcome boost_other_velocities(double tol) {
  const auto shot = shoot(potentials::wref(), 3, 0, 0.8, reference_grid());
  bool ok = true;
  std::ostringstream d;
  for (double v : {0.0, 0.3}) {
    const auto o = boost_orders(shot.profile, 0.8, v, 0.1);
    ok = ok && std::abs(o.ratio() - 4.0) <= 0.5 * tol;
    d << "v=" << v << ": ratio " << fmt(o.ratio()) << "; ";
  }
  return {ok, d.str()};
}

Outcome test_function_power_laws(double tol) {
  const FunctionalContext ctx(RadialGrid(3, 0, 90.0, 9000), potentials::wref());
  std::vector<double> rs{10.0, 20.0, 40.0, 80.0}, grad, mass, nonlin;
  for (double r : rs) {
    const Field u = build_test_function(ctx.grid(), {TestFunctionSpec::Shape::Ball, r, 1.0});
    grad.push_back(dirichlet_form(u));
    mass.push_back(inner(u, u));
    nonlin.push_back(std::abs(functional_j(ctx, u) - 0.5 * dirichlet_form(u) - 0.5 * inner(u, u)));
  }
  const double pg = fit_power_law(rs, grad).exponent, pm = fit_power_law(rs, mass).exponent,
               pn = fit_power_law(rs, nonlin).exponent;
  const bool ok = std::abs(pg - 2.0) <= 0.05 * 2.0 * tol && std::abs(pm - 3.0) <= 0.05 * 3.0 * tol &&
                  std::abs(pn - 3.0) <= 0.05 * 3.0 * tol;
  return {ok, "exponents: gradient " + fmt(pg) + ", mass " + fmt(pm) + ", nonlinear " + fmt(pn)};
}

Outcome decay_law(double tol) {
  const double omega = 0.9;
  const auto shot = shoot(potentials::wref(), 3, 0, omega, RadialGrid(3, 0, 60.0, 6000));
  const double kappa = std::sqrt(1.0 - omega * omega);
  const double err = std::abs(shot.decay_rate - kappa) / kappa;
  return {err < 0.1 * tol && shot.residual < 1e-8 * tol,
          "decay rate " + fmt(shot.decay_rate) + " vs " + fmt(kappa) + ", residual " + fmt(shot.residual)};
}

Outcome vortex_shooting(double tol) {
  const auto shot = shoot(potentials::wref(), 2, 1, 0.8, RadialGrid(2, 1, 40.0, 4000));
  const auto& g = shot.profile.grid();
  const double slope0 = shot.profile[0] / g.r(0), slope1 = shot.profile[1] / g.r(1);
  const double lin = std::abs(slope1 - slope0) / slope0;
  const double kappa = 0.6;
  const double err = std::abs(shot.decay_rate - kappa) / kappa;
  return {lin < 1e-3 * tol && err < 0.1 * tol,
          "u/r near origin varies by " + fmt(lin) + ", decay rate " + fmt(shot.decay_rate)};
}

Outcome scan_determinism(double) {
  const FunctionalContext ctx(RadialGrid(3, 0, 40.0, 2000), potentials::wref());
  const double sigma = reference_sigma(ctx);
  std::vector<double> sigmas;
  for (int k = 0; k < 8; ++k) sigmas.push_back(sigma * std::pow(2.0, 0.5 * (k - 4)));
  MinimizeConfig base = quick_config(sigma);
  base.c_hat = estimate_c_hat(ctx).c_hat;
  const auto serial = sigma_scan(ctx, sigmas, base, 1);
  const auto parallel = sigma_scan(ctx, sigmas, base, 3);
  bool same = serial.size() == parallel.size();
  int in_sigma = 0;
  for (std::size_t i = 0; same && i < serial.size(); ++i) {
    same = serial[i].status == parallel[i].status && serial[i].lambda_min == parallel[i].lambda_min;
    in_sigma += serial[i].in_sigma;
  }
  return {same, std::to_string(in_sigma) + " of 8 scan points in Sigma; serial and parallel scans " +
                    (same ? "identical" : "differ")};
}

Outcome free_field(double) {
  const FunctionalContext ctx(RadialGrid(3, 0, 30.0, 1500), potentials::wfree());
  const auto est = estimate_c_hat(ctx);
  MinimizeConfig cfg = quick_config(500.0);
  cfg.c_hat = est.c_hat;
  bool in_sigma = true;
  std::string status;
  try {
    in_sigma = minimize(ctx, cfg).in_sigma_set;
    status = "converged";
  } catch (const MinimizeNonConvergence& e) {
    in_sigma = e.last().in_sigma_set;
    status = "not converged";
  }
  const bool ok = std::abs(est.c_hat - 1.0) < 1e-2 && !in_sigma;
  return {ok, "c_hat = " + fmt(est.c_hat) + ", sigma = 500 " + status + ", in_sigma_set = " +
                  (in_sigma ? "true" : "false")};
}

std::vector<Criterion> criteria() {
  return {
      {"1", "multiplier identity", 30.0, false, multiplier_identity},
      {"2", "frequency band", 180.0, false, frequency_band},
      {"3", "hylomorphy certificate", 1.0, false, hylomorphy_ratio_check},
      {"4", "shooting vs minimizer", 120.0, false, oracle_equivalence},
      {"5", "gradient suites", 60.0, false, gradient_suites},
      {"6", "gauge bound", 60.0, false, gauge_bound},
      {"7", "q^2 scaling", 30.0, false, q_squared_scaling},
      {"8", "NKGM consistency", 180.0, false, nkgm_consistency},
      {"9", "non-existence trend", 5.0, false, nonexistence_trend},
      {"10", "vortex", 120.0, false, vortex},
      {"11", "boost residual", 60.0, false, boost_residual},
      {"12", "truncation safety", 60.0, false, truncation_safety},
      {"13", "openness of Sigma", 120.0, false, openness},
      {"x1", "boost residual at v = 0, 0.3", 60.0, true, boost_other_velocities},
      {"x2", "test-function power laws", 60.0, true, test_function_power_laws},
      {"x3", "shooting decay law", 60.0, true, decay_law},
      {"x4", "vortex shooting", 60.0, true, vortex_shooting},
      {"x5", "parallel scan determinism", 120.0, true, scan_determinism},
      {"x6", "free field has no hylomorphic states", 60.0, true, free_field},
  };
}

}  // namespace

std::vector<CriterionResult> run_verification(const VerifyOptions& options,
                                              const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (c.extended && options.suite != Suite::All) continue;
    CriterionResult r{c.id, c.name, false, {}, 0.0, c.time_limit};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome o = c.run(options.tolerance_scale);
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.time_limit) {
      r.pass = false;
      r.detail += "; exceeded time limit of " + fmt(r.time_limit) + " s";
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hylo
