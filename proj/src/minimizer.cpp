#include "hylo/minimizer.hpp"

#include "hylo/analysis.hpp"
#include "hylo/maxwell.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace hylo {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kVanishingK = 1e-14;
constexpr double kNoiseFloor = 1e-10;

struct Evaluation {
  double j = 0.0;
  double k = 0.0;
  Field grad_j;
  Field grad_k;
};

Evaluation evaluate(const FunctionalContext& ctx, const Field& u) {
  Evaluation e{functional_j(ctx, u), 0.0, grad_j(ctx, u), Field(ctx.grid())};
  if (ctx.coupling_q() > 0.0) {
    auto kq = evaluate_k_q(ctx, u);
    e.k = kq.value;
    e.grad_k = std::move(kq.gradient);
  } else {
    e.k = 0.5 * inner(u, u);
    e.grad_k = u;
  }
  return e;
}

/// Sobolev direction d = -L1^{-1} (M g): the steepest descent direction in the
/// inner product <L1 u, v>, which removes the h^-2 stiffness of the Laplacian.
Field sobolev_direction(const FunctionalContext& ctx, const Field& g) {
  const auto w = ctx.weights();
  std::vector<double> rhs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rhs[i] = -w[i] * g[i];
  return Field(ctx.grid(), ctx.l1().solve(rhs));
}

/// u + alpha d reflected into the nonnegative cone.  With N even and a
/// stiffness matrix with nonpositive off-diagonals, u -> |u| keeps K and
/// cannot increase J, so the reflection never raises the objective.
Field project_step(const Field& u, const Field& d, double alpha) {
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::abs(u[i] + alpha * d[i]);
  return out;
}

/// Generic projected descent with Armijo backtracking in the Sobolev metric.
struct DescentProblem {
  std::function<double(const Field&)> value;
  /// value and weighted-L2 gradient
  std::function<std::pair<double, Field>(const Field&)> value_grad;
  /// Stationarity measure used for the stopping test.
  std::function<double(const Field&, const Field&)> residual;
};

struct DescentOptions {
  double tol = 1e-8;
  int max_iters = 200000;
  double step_init = 1.0;
  double backtrack = 0.5;
  double step_max = 1e3;
  /// Stop when the value decreases by less than this (relative) over `window` iterations.
  double stagnation = 0.0;
  int window = 200;
  bool keep_trace = false;
  std::function<void(const Field&)> on_accept;
};

struct DescentOutcome {
  Field u;
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string reason;
  double max_increase = 0.0;
  std::vector<double> trace;
};

DescentOutcome descend(const FunctionalContext& ctx, const DescentProblem& p, Field u, const DescentOptions& opt) {
  DescentOutcome out{u, 0.0, 0.0, 0, false, {}, 0.0, {}};
  auto [value, grad] = p.value_grad(u);
  double res = p.residual(u, grad);
  double alpha = opt.step_init;
  std::vector<double> window_values;
  if (opt.keep_trace) out.trace.push_back(value);
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    if (!std::isfinite(value) || !std::isfinite(res)) {
      out.reason = "non-finite iterate";
      break;
    }
    if (res < opt.tol) {
      out.converged = true;
      out.reason = "residual below tolerance";
      break;
    }
    if (opt.stagnation > 0.0) {
      window_values.push_back(value);
      if (static_cast<int>(window_values.size()) > opt.window) {
        const double old = window_values[window_values.size() - 1 - opt.window];
        if (old - value <= opt.stagnation * std::max(1e-300, std::abs(value))) {
          out.converged = true;
          out.reason = "stagnation";
          break;
        }
      }
    }
    const Field d = sobolev_direction(ctx, grad);
    const double slope = inner(grad, d);
    bool accepted = false;
    Field trial(u.grid());
    double trial_value = 0.0;
    std::pair<double, Field> trial_eval{0.0, Field(u.grid())};
    bool have_trial_grad = false;
    while (alpha > 1e-16) {
      trial = project_step(u, d, alpha);
      trial_value = p.value(trial);
      if (std::isfinite(trial_value) && trial_value <= value + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
      // Near convergence the predicted decrease sinks below round-off in the
      // value; accept if the change is at the noise floor and the residual drops.
      // The preconditioned iteration contracts the dual norm <g, L1^{-1} g>.
      if (std::isfinite(trial_value) &&
          std::abs(trial_value - value) <= kNoiseFloor * std::max(1.0, std::abs(value))) {
        trial_eval = p.value_grad(trial);
        if (-inner(trial_eval.second, sobolev_direction(ctx, trial_eval.second)) < -slope) {
          accepted = true;
          have_trial_grad = true;
          break;
        }
      }
      alpha *= opt.backtrack;
    }
    if (!accepted) {
      out.reason = "line search stalled";
      break;
    }
    if (!have_trial_grad) trial_eval = p.value_grad(trial);
    out.max_increase = std::max(out.max_increase, trial_eval.first - value);
    u = std::move(trial);
    value = trial_eval.first;
    grad = std::move(trial_eval.second);
    res = p.residual(u, grad);
    if (opt.keep_trace) out.trace.push_back(value);
    if (opt.on_accept) opt.on_accept(u);
    alpha = std::min(opt.step_max, alpha * 2.0);
  }
  if (it >= opt.max_iters) out.reason = "max_iters reached";
  out.u = std::move(u);
  out.value = value;
  out.residual = res;
  out.iterations = it;
  return out;
}

double c_hat_from_ratio(double ratio_inf, double m) {
  const double omega_bar = std::max(m, std::sqrt(std::max(0.0, ratio_inf)));
  return 0.5 * (ratio_inf / omega_bar + omega_bar);
}

TestFunctionSpec default_shape(const RadialGrid& grid, double s0) {
  TestFunctionSpec spec;
  spec.s0 = s0;
  spec.shape = grid.ell() != 0 ? TestFunctionSpec::Shape::Annulus : TestFunctionSpec::Shape::Ball;
  return spec;
}

Field scaled(Field u, double factor) {
  for (auto& x : u.values()) x *= factor;
  return u;
}

}  // namespace

void MinimizeConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw PreconditionError("minimize: sigma must be positive");
  if (!(tol_residual > 0.0)) throw PreconditionError("minimize: tol_residual must be positive");
  if (max_iters <= 0) throw PreconditionError("minimize: max_iters must be positive");
  if (!(step_init > 0.0)) throw PreconditionError("minimize: step_init must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw PreconditionError("minimize: backtrack_factor must lie in (0, 1)");
}

ReducedEnergy reduced_energy(const FunctionalContext& ctx, const Field& u, double sigma) {
  const double k = functional_k(ctx, u);
  if (!(k > 0.0)) throw VanishingChargeError("reduced_energy: K(u) <= 0, charge constraint degenerate");
  return {functional_j(ctx, u) + sigma * sigma / (4.0 * k), sigma / (2.0 * k)};
}

Field reduced_energy_gradient(const FunctionalContext& ctx, const Field& u, double sigma) {
  auto e = evaluate(ctx, u);
  if (!(e.k > 0.0)) throw VanishingChargeError("reduced_energy_gradient: K(u) <= 0");
  const double omega = sigma / (2.0 * e.k);
  Field g = std::move(e.grad_j);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= omega * omega * e.grad_k[i];
  return g;
}

Field initial_profile(const FunctionalContext& ctx, const InitSpec& init, double sigma) {
  const auto& grid = ctx.grid();
  const auto& w = ctx.potential();
  const double target_k = sigma / w.mass();  // omega = sigma / 2K = m / 2
  switch (init.kind) {
    case InitSpec::Kind::File:
      return read_field_csv(grid, init.path);
    case InitSpec::Kind::Gaussian: {
      if (!(init.param > 0.0)) throw PreconditionError("gaussian init: width must be positive");
      Field u(grid);
      const int ell = std::abs(grid.ell());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.r(i) / init.param;
        u[i] = std::pow(x, ell) * std::exp(-x * x);
      }
      return scaled(u, std::sqrt(target_k / functional_k(ctx, u)));
    }
    case InitSpec::Kind::TestFunction:
      break;
  }
  TestFunctionSpec spec = default_shape(grid, w.s0());
  if (init.param > 0.0) {
    spec.radius = init.param;
    return build_test_function(grid, spec);
  }
  const bool ball = spec.shape == TestFunctionSpec::Shape::Ball;
  double lo = ball ? 0.5 * grid.h() : 1.0 + grid.h();
  double hi = ball ? grid.r_max() - 1.0 - grid.h() : 0.5 * (grid.r_max() - 1.0) - grid.h();
  if (!(hi > lo)) throw PreconditionError("initial profile: grid too small for a test function");
  auto k_at = [&](double radius) {
    spec.radius = radius;
    return functional_k(ctx, build_test_function(grid, spec));
  };
  if (k_at(lo) >= target_k) {
    spec.radius = lo;
    Field u = build_test_function(grid, spec);
    return scaled(u, std::sqrt(target_k / functional_k(ctx, u)));
  }
  if (k_at(hi) <= target_k) {
    spec.radius = hi;
    Field u = build_test_function(grid, spec);
    return scaled(u, std::sqrt(target_k / functional_k(ctx, u)));
  }
  for (int i = 0; i < 100 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (k_at(mid) < target_k ? lo : hi) = mid;
  }
  spec.radius = 0.5 * (lo + hi);
  return build_test_function(grid, spec);
}

SolutionRecord minimize(const FunctionalContext& ctx, const MinimizeConfig& config) {
  config.validate();
  const double sigma = config.sigma;
  const double m = ctx.potential().mass();

  double max_charge_error = 0.0;
  DescentProblem problem;
  problem.value = [&](const Field& u) {
    const double k = functional_k(ctx, u);
    if (!(k > kVanishingK)) return std::numeric_limits<double>::infinity();
    return functional_j(ctx, u) + sigma * sigma / (4.0 * k);
  };
  problem.value_grad = [&](const Field& u) {
    auto e = evaluate(ctx, u);
    if (!(e.k > kVanishingK))
      throw VanishingChargeError("minimize: K(u) collapsed below 1e-14 (vanishing charge)");
    const double omega = sigma / (2.0 * e.k);
    Field g = std::move(e.grad_j);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= omega * omega * e.grad_k[i];
    // Charge is exact by construction: H = 2 omega K = sigma.
    max_charge_error = std::max(max_charge_error, std::abs(2.0 * omega * e.k - sigma) / sigma);
    return std::pair<double, Field>{e.j + sigma * sigma / (4.0 * e.k), std::move(g)};
  };
  problem.residual = [](const Field&, const Field& g) { return norm(g); };

  DescentOptions opt;
  opt.tol = config.tol_residual;
  opt.max_iters = config.max_iters;
  opt.step_init = config.step_init;
  opt.backtrack = config.backtrack_factor;
  opt.keep_trace = config.keep_trace;

  Field u0 = initial_profile(ctx, config.init, sigma);
  for (auto& x : u0.values()) x = std::abs(x);
  auto out = descend(ctx, problem, std::move(u0), opt);

  SolutionRecord rec{out.u};
  rec.sigma = sigma;
  const auto e = evaluate(ctx, out.u);
  if (!(e.k > kVanishingK)) throw VanishingChargeError("minimize: K(u) collapsed below 1e-14 (vanishing charge)");
  rec.omega = sigma / (2.0 * e.k);
  rec.energy = e.j + rec.omega * rec.omega * e.k;
  rec.charge = 2.0 * rec.omega * e.k;
  rec.lambda_ratio = rec.energy / rec.charge;
  rec.residual = out.residual;
  rec.iterations = out.iterations;
  rec.max_energy_increase = out.max_increase;
  rec.max_charge_error = std::max(max_charge_error, std::abs(rec.charge - sigma) / sigma);
  rec.energy_trace = std::move(out.trace);
  {
    // lambda from the u-equation, normalized so that E' = lambda (omega K', K).
    double num = 0.0, den = 0.0;
    const auto& g = ctx.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double de = e.grad_j[i] + rec.omega * rec.omega * e.grad_k[i];
      const double dh = 2.0 * rec.omega * e.grad_k[i];
      num += g.weight(i) * de * dh;
      den += g.weight(i) * dh * dh;
    }
    rec.multiplier = 2.0 * num / den;
  }
  rec.rayleigh_min = rayleigh_min(ctx.grid(), ctx.potential().m2());
  rec.frequency_band_ok = rec.omega > 0.0 && rec.omega < std::sqrt(rec.rayleigh_min);
  rec.omega_above_mass = rec.omega > 1.01 * m;
  if (config.c_hat) {
    rec.c_hat_estimate = *config.c_hat;
  } else if (config.estimate_c_hat) {
    rec.c_hat_estimate = estimate_c_hat(ctx).c_hat;
  } else {
    rec.c_hat_estimate = m;
  }
  rec.in_sigma_set = out.converged && rec.frequency_band_ok && rec.lambda_ratio < m &&
                     rec.lambda_ratio < (1.0 - kSigmaSetMargin) * rec.c_hat_estimate;

  if (!out.converged) {
    std::ostringstream msg;
    msg << "minimize: no convergence (" << out.reason << ") after " << out.iterations
        << " iterations; residual " << format_double(out.residual);
    throw MinimizeNonConvergence(msg.str(), std::move(rec));
  }
  return rec;
}

CHatEstimate estimate_c_hat(const FunctionalContext& ctx) {
  const auto& grid = ctx.grid();
  const auto& w = ctx.potential();
  const double m = w.mass();

  DescentProblem problem;
  problem.value = [&](const Field& u) {
    const double k = functional_k(ctx, u);
    if (!(k > kVanishingK)) return std::numeric_limits<double>::infinity();
    return functional_j(ctx, u) / k;
  };
  problem.value_grad = [&](const Field& u) {
    auto e = evaluate(ctx, u);
    if (!(e.k > kVanishingK)) throw VanishingChargeError("estimate_c_hat: K(u) collapsed");
    const double ratio = e.j / e.k;
    Field g = std::move(e.grad_j);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - ratio * e.grad_k[i]) / e.k;
    return std::pair<double, Field>{ratio, std::move(g)};
  };
  // Scale-free stationarity: |grad J - Q grad K| relative to |grad J| + Q |grad K|.
  problem.residual = [&](const Field& u, const Field& g) {
    const double k = functional_k(ctx, u);
    return norm(g) * k / std::max(1e-300, norm(grad_j(ctx, u)) + std::abs(functional_j(ctx, u) / k) * norm(grad_k(ctx, u)));
  };

  DescentOptions opt;
  opt.tol = 1e-9;
  opt.max_iters = 20000;
  opt.stagnation = 1e-10;
  opt.window = 200;
  // grad(J/K) carries a 1/K factor, so useful steps scale like K.
  opt.step_max = 1e15;

  std::vector<Field> starts;
  TestFunctionSpec spec = default_shape(grid, w.s0());
  const double usable = spec.shape == TestFunctionSpec::Shape::Ball ? grid.r_max() - 1.0 : 0.5 * (grid.r_max() - 1.0);
  for (double frac : {0.25, 0.5, 0.8}) {
    spec.radius = std::max(spec.shape == TestFunctionSpec::Shape::Ball ? grid.h() : 1.0 + grid.h(), frac * usable);
    if (spec.support() < grid.r_max()) starts.push_back(build_test_function(grid, spec));
  }
  {
    Field g(grid);
    const double width = 0.25 * grid.r_max();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.r(i) / width;
      g[i] = w.s0() * std::pow(x, std::abs(grid.ell())) * std::exp(-x * x);
    }
    starts.push_back(std::move(g));
  }

  CHatEstimate est;
  est.ratio_inf = std::numeric_limits<double>::infinity();
  std::string failures;
  for (auto& s : starts) {
    auto out = descend(ctx, problem, s, opt);
    if (!out.converged) {
      failures += " [" + out.reason + "]";
      continue;
    }
    ++est.starts;
    est.ratio_inf = std::min(est.ratio_inf, out.value);
  }
  if (est.starts == 0) throw ConvergenceError("estimate_c_hat: descent on J/K did not converge:" + failures);
  est.c_hat = c_hat_from_ratio(est.ratio_inf, m);
  return est;
}

std::vector<SigmaScanEntry> sigma_scan(const FunctionalContext& ctx, std::vector<double> sigmas,
                                       const MinimizeConfig& base, int jobs) {
  std::sort(sigmas.begin(), sigmas.end());
  std::vector<SigmaScanEntry> out(sigmas.size());
  if (sigmas.empty()) return out;
  for (double s : sigmas)
    if (!(s > 0.0)) throw PreconditionError("sigma_scan: sigmas must be positive");

  MinimizeConfig cfg = base;
  if (!cfg.c_hat && cfg.estimate_c_hat) cfg.c_hat = estimate_c_hat(ctx).c_hat;

  auto run_one = [&](std::size_t idx) {
    SigmaScanEntry& e = out[idx];
    e.sigma = sigmas[idx];
    MinimizeConfig c = cfg;
    c.sigma = e.sigma;
    try {
      auto rec = minimize(ctx, c);
      e.status = "converged";
      e.lambda_min = rec.lambda_ratio;
      e.omega = rec.omega;
      e.in_sigma = rec.in_sigma_set;
      e.record = std::move(rec);
    } catch (const MinimizeNonConvergence& ex) {
      e.status = "nonconvergence";
      e.message = ex.what();
      e.lambda_min = ex.last().lambda_ratio;
      e.omega = ex.last().omega;
      e.record = ex.last();
    } catch (const VanishingChargeError& ex) {
      e.status = "vanishing_charge";
      e.message = ex.what();
    } catch (const std::exception& ex) {
      e.status = "error";
      e.message = ex.what();
    }
  };

  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(sigmas.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < sigmas.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < sigmas.size(); i = next++) run_one(i);
    });
  pool.clear();
  return out;
}

}  // namespace hylo
