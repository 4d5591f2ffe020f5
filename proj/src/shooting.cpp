#include "hylo/shooting.hpp"

#include "hylo/errors.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hylo {

namespace {

enum class Outcome { Undershoot, Overshoot, Escape, Undecided };

struct State {
  double u;
  double v;
};

struct Trajectory {
  Outcome outcome = Outcome::Undecided;
  std::vector<double> u;  // at r = (j + 1) k
  std::vector<double> v;
};

class Shooter {
public:
  Shooter(const PotentialSpec& w, int dim, int ell, double omega, double step, double r_end, double u_escape)
      : w_(w), dim_(dim), ell2_(static_cast<double>(ell) * ell), ell_(std::abs(ell)), omega2_(omega * omega),
        k_(step), r_end_(r_end), u_escape_(u_escape) {}

  double w_prime(double u) const { return u < 0.0 ? -w_.w_prime(-u) : w_.w_prime(u); }

  State deriv(double r, const State& s) const {
    const double acc = -(dim_ - 1) / r * s.v + w_prime(s.u) + ell2_ / (r * r) * s.u - omega2_ * s.u;
    return {s.v, acc};
  }

  State rk4(double r, const State& s, double h) const {
    const State k1 = deriv(r, s);
    const State k2 = deriv(r + 0.5 * h, {s.u + 0.5 * h * k1.u, s.v + 0.5 * h * k1.v});
    const State k3 = deriv(r + 0.5 * h, {s.u + 0.5 * h * k2.u, s.v + 0.5 * h * k2.v});
    const State k4 = deriv(r + h, {s.u + h * k3.u, s.v + h * k3.v});
    return {s.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
  }

  /// Regular expansion at r = k.
  State start(double param) const {
    const double r = k_;
    if (ell_ == 0) {
      const double curvature = (w_prime(param) - omega2_ * param) / dim_;
      return {param + 0.5 * curvature * r * r, curvature * r};
    }
    const double a = (w_.m2() - omega2_) / (4.0 * (ell_ + 1));
    const double rl = std::pow(r, ell_);
    return {param * rl * (1.0 + a * r * r), param * rl / r * (ell_ + (ell_ + 2) * a * r * r)};
  }

  Trajectory run(double param, bool record) const {
    Trajectory t;
    State s = start(param);
    const auto steps = static_cast<std::size_t>(std::ceil(r_end_ / k_));
    if (record) {
      t.u.reserve(steps);
      t.v.reserve(steps);
    }
    bool past_max = ell_ == 0;
    for (std::size_t j = 0; j < steps; ++j) {
      if (record) {
        t.u.push_back(s.u);
        t.v.push_back(s.v);
      }
      if (!std::isfinite(s.u) || s.u > u_escape_) {
        t.outcome = Outcome::Escape;
        return t;
      }
      if (s.u < 0.0) {
        t.outcome = Outcome::Overshoot;
        return t;
      }
      if (past_max && s.v > 0.0) {
        t.outcome = Outcome::Undershoot;
        return t;
      }
      if (s.v < 0.0) past_max = true;
      s = rk4(static_cast<double>(j + 1) * k_, s, k_);
    }
    return t;
  }

  Outcome classify(double param) const { return run(param, false).outcome; }

  /// Richardson estimate of the local error per unit step at internal node j.
  double local_error(std::size_t j, const State& s) const {
    const double r = static_cast<double>(j + 1) * k_;
    const State big = rk4(r, s, 2.0 * k_);
    const State two = rk4(r + k_, rk4(r, s, k_), k_);
    return std::max(std::abs(big.u - two.u), std::abs(big.v - two.v)) / (15.0 * 2.0 * k_);
  }

  double step() const { return k_; }

private:
  const PotentialSpec& w_;
  int dim_;
  double ell2_;
  int ell_;
  double omega2_;
  double k_;
  double r_end_;
  double u_escape_;
};

struct Window {
  double u_a = 0.0;
  double u_b = 0.0;
};

/// Zeros of f(u) = W'(u) - omega^2 u: u_a where f turns negative, u_b where
/// it turns positive again (or the search limit if it never does).
Window frequency_window(const PotentialSpec& w, double omega) {
  const double omega2 = omega * omega;
  auto f = [&](double u) { return w.w_prime(u) - omega2 * u; };
  auto effective = [&](double u) { return 0.5 * omega2 * u * u - w.w(u); };
  const double limit = 10.0 * std::max(w.s0(), w.s1().value_or(w.s0()));
  constexpr int kSamples = 20000;
  std::optional<double> u_a, u_b;
  double prev_u = limit * 1e-6;
  double prev_f = f(prev_u);
  auto refine = [&](double lo, double hi) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(), iters);
    return 0.5 * (r.first + r.second);
  };
  for (int i = 1; i <= kSamples; ++i) {
    const double u = limit * i / kSamples;
    const double fu = f(u);
    if (!u_a && prev_f > 0.0 && fu <= 0.0) u_a = refine(prev_u, u);
    else if (u_a && prev_f < 0.0 && fu >= 0.0) {
      u_b = refine(prev_u, u);
      break;
    }
    prev_u = u;
    prev_f = fu;
  }
  std::ostringstream msg;
  msg << "shoot: no decaying ground state at omega = " << format_double(omega);
  if (!u_a) throw NoDecayingSolutionError(msg.str() + " (W'(u) > omega^2 u for all sampled u)");
  Window win{*u_a, u_b.value_or(limit)};
  if (!(effective(win.u_b) > 0.0))
    throw NoDecayingSolutionError(msg.str() + " (omega below the lower edge of the frequency window)");
  return win;
}

struct Bracket {
  double lo = 0.0;  // undershoot
  double hi = 0.0;  // overshoot
};

std::optional<Bracket> adjacent_pair(const std::vector<double>& params, const std::vector<Outcome>& out) {
  for (std::size_t i = 0; i + 1 < params.size(); ++i)
    if (out[i] == Outcome::Undershoot && out[i + 1] == Outcome::Overshoot) return Bracket{params[i], params[i + 1]};
  return std::nullopt;
}

std::optional<Bracket> find_bracket(const Shooter& shooter, int ell, const Window& win) {
  std::vector<double> params;
  std::vector<Outcome> out;
  if (ell == 0) {
    // Linear sweep of (u_a, u_b), then exponentially closer to u_b where
    // thin-wall states live.
    const double width = win.u_b - win.u_a;
    for (int i = 1; i < 64; ++i) params.push_back(win.u_a + width * i / 64.0);
    for (double s = 4.5; s <= 36.0; s += 0.5) params.push_back(win.u_b - width * std::exp(-s));
    for (double p : params) out.push_back(shooter.classify(p));
    return adjacent_pair(params, out);
  }
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    params.push_back(std::pow(10.0, x));
    out.push_back(shooter.classify(params.back()));
  }
  if (auto b = adjacent_pair(params, out)) return b;
  // Ground states sit just below the escape threshold: locate it, then probe
  // geometrically closer offsets.
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    if (out[i] == Outcome::Escape || out[i + 1] != Outcome::Escape) continue;
    double lo = params[i], hi = params[i + 1];
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (shooter.classify(mid) == Outcome::Escape ? hi : lo) = mid;
    }
    std::vector<double> probe;
    std::vector<Outcome> probe_out;
    for (int k = 1; k <= 16; ++k) {
      probe.push_back(lo * (1.0 - std::pow(10.0, -k)));
      probe_out.push_back(shooter.classify(probe.back()));
    }
    probe.push_back(lo);
    probe_out.push_back(shooter.classify(lo));
    if (auto b = adjacent_pair(probe, probe_out)) return b;
  }
  return std::nullopt;
}

double tail_shape(int dim, int ell, double kappa, double r) {
  if (dim == 3) return std::exp(-kappa * r) / r;
  return boost::math::cyl_bessel_k(std::abs(ell), kappa * r);
}

}  // namespace

ShootResult shoot(const PotentialSpec& potential, int dim, int ell, double omega, const RadialGrid& grid) {
  if (grid.dim() != dim || grid.ell() != ell)
    throw GridMismatchError("shoot: grid dimension or vorticity differs from the requested problem");
  const double m = potential.mass();
  if (!(omega > 0.0) || !(omega < m)) {
    std::ostringstream msg;
    msg << "shoot: omega = " << format_double(omega) << " outside (0, m); no exponentially decaying solution";
    throw NoDecayingSolutionError(msg.str());
  }
  const Window win = frequency_window(potential, omega);
  const double kappa = std::sqrt(potential.m2() - omega * omega);
  const double r_end = grid.r_max() + 40.0 / kappa;
  const double u_escape = 2.0 * win.u_b + 1.0;
  const Shooter shooter(potential, dim, ell, omega, 0.25 * grid.h(), r_end, u_escape);

  const auto bracket = find_bracket(shooter, ell, win);
  if (!bracket) {
    std::ostringstream msg;
    msg << "shoot: no undershoot/overshoot bracket found at omega = " << format_double(omega);
    throw BracketError(msg.str());
  }
  double lo = bracket->lo, hi = bracket->hi;
  int steps = 0;
  for (; steps < 200; ++steps) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const Outcome o = shooter.classify(mid);
    if (o == Outcome::Undecided) {
      lo = hi = mid;
      break;
    }
    (o == Outcome::Undershoot ? lo : hi) = mid;
  }

  const Trajectory under = shooter.run(lo, true);
  const Trajectory over = shooter.run(hi, true);
  const std::size_t common = std::min(under.u.size(), over.u.size());
  std::size_t cut = 0;
  double peak = 0.0;
  for (; cut < common; ++cut) {
    const double a = under.u[cut], b = over.u[cut];
    const double avg = 0.5 * (a + b);
    peak = std::max(peak, avg);
    if (!(avg > 0.0) || std::abs(a - b) > 1e-6 * avg) break;
    // Stop at the turning point of the undershoot branch.
    if (ell == 0 && under.v[cut] > 0.0) break;
    if (ell != 0 && avg < 0.5 * peak && under.v[cut] > 0.0) break;
  }
  if (cut < 8) throw BracketError("shoot: bracketing trajectories diverge immediately");
  cut -= 1;

  const double k = shooter.step();
  auto radius = [k](std::size_t j) { return static_cast<double>(j + 1) * k; };
  auto avg_u = [&](std::size_t j) { return 0.5 * (under.u[j] + over.u[j]); };
  const double r_cut = radius(cut);
  const double u_cut = avg_u(cut);

  ShootResult res{Field(grid)};
  res.omega = omega;
  res.shoot_param = 0.5 * (lo + hi);
  res.bisection_steps = steps;
  res.cutoff_radius = r_cut;
  const double tail_norm = u_cut / tail_shape(dim, ell, kappa, r_cut);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t j = 4 * (i + 1) - 1;  // grid node r_i = (i + 1) h = (j + 1) k
    res.profile[i] = j <= cut ? avg_u(j) : tail_norm * tail_shape(dim, ell, kappa, grid.r(i));
  }

  for (std::size_t j = 0; j < cut; ++j)
    res.residual = std::max(res.residual, shooter.local_error(j, {under.u[j], under.v[j]}));

  // Decay fit over the last decade of the integrated profile.
  std::vector<double> xs, ys;
  const double half_dim = 0.5 * (dim - 1);
  for (std::size_t j = 0; j <= cut; ++j) {
    const double u = avg_u(j);
    if (u <= 10.0 * u_cut && u >= u_cut && (j == 0 || under.v[j] < 0.0)) {
      xs.push_back(radius(j));
      ys.push_back(std::log(u * std::pow(radius(j), half_dim)));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    res.decay_rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  const FunctionalContext ctx(grid, potential);
  const double kk = functional_k(ctx, res.profile);
  res.energy = functional_j(ctx, res.profile) + omega * omega * kk;
  res.charge = 2.0 * omega * kk;
  return res;
}

CrossValidation cross_validate(const ShootResult& shot, const SolutionRecord& record) {
  CrossValidation cv;
  const auto& grid = record.u.grid();
  if (grid.dim() != shot.profile.grid().dim() || grid.ell() != shot.profile.grid().ell())
    throw GridMismatchError("cross_validate: profiles solve different problems (dim or ell differ)");
  const Field u = shot.profile.grid() == grid ? shot.profile : shot.profile.resample(grid);
  Field diff(grid);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u[i] - record.u[i];
  const double ref = norm(record.u);
  cv.l2_distance = ref > 0.0 ? norm(diff) / ref : norm(diff);
  cv.energy_difference = std::abs(shot.energy - record.energy) / std::max(std::abs(record.energy), 1e-300);
  cv.omega_mismatch = std::abs(shot.omega - record.omega) / record.omega;
  cv.comparable = cv.omega_mismatch <= 0.05;
  cv.pass = cv.comparable && cv.l2_distance < 1e-2 && cv.energy_difference < 1e-2;
  return cv;
}

}  // namespace hylo
