#include "hylo/potential.hpp"

#include "hylo/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace hylo {

namespace {

void verify_derivative(const std::string& name, const PotentialSpec::Scalar& n,
                       const PotentialSpec::Scalar& dn, double span, std::optional<double> kink) {
  constexpr int kPoints = 32;
  for (int k = 1; k <= kPoints; ++k) {
    const double s = span * (k - 0.5) / kPoints;
    const double eps = 1e-5 * std::max(1.0, s);
    // N'' may jump at the truncation point; a stencil across it is only first order.
    if (kink && std::abs(s - *kink) <= 2.0 * eps) continue;
    const double fd = (n(s + eps) - n(s - eps)) / (2.0 * eps);
    const double exact = dn(s);
    const double scale = std::max({1.0, std::abs(exact), std::abs(n(s)) / s});
    if (std::abs(fd - exact) > 1e-6 * scale) {
      std::ostringstream msg;
      msg << "potential '" << name << "': N' disagrees with central differences of N at s=" << s
          << " (N'=" << exact << ", fd=" << fd << ")";
      throw PreconditionError(msg.str());
    }
  }
}

}  // namespace

PotentialSpec::PotentialSpec(std::string name, double m2, Scalar n_eval, Scalar n_prime, double s0,
                             std::optional<double> s1, std::optional<double> p)
    : name_(std::move(name)),
      m2_(m2),
      n_eval_(std::move(n_eval)),
      n_prime_(std::move(n_prime)),
      s0_(s0),
      s1_(s1),
      p_(p) {
  if (!(m2_ > 0.0)) throw PreconditionError("potential '" + name_ + "': m2 must be positive");
  if (!(s0_ > 0.0)) throw PreconditionError("potential '" + name_ + "': s0 must be positive");
  if (!n_eval_ || !n_prime_) throw PreconditionError("potential '" + name_ + "': missing evaluator");
  if (std::abs(n_eval_(0.0)) > 1e-12 || std::abs(n_prime_(0.0)) > 1e-12)
    throw PreconditionError("potential '" + name_ + "': requires N(0) = N'(0) = 0");
  if (s1_ && !(*s1_ > 0.0)) throw PreconditionError("potential '" + name_ + "': s1 must be positive");
  if (s1_ && n_prime_(*s1_) < 0.0)
    throw PreconditionError("potential '" + name_ + "': requires N'(s1) >= 0");
  verify_derivative(name_, n_eval_, n_prime_, 2.0 * std::max(s0_, s1_.value_or(s0_)), s1_);
}

double PotentialSpec::mass() const { return std::sqrt(m2_); }

double PotentialSpec::w(double s) const {
  if (s < 0.0) throw DomainError("W is defined on s >= 0 only");
  return 0.5 * m2_ * s * s + n_eval_(s);
}

double PotentialSpec::w_prime(double s) const {
  if (s < 0.0) throw DomainError("W' is defined on s >= 0 only");
  return m2_ * s + n_prime_(s);
}

double eval_w(const PotentialSpec& spec, double s) { return spec.w(s); }

AssumptionReport check_assumptions(const PotentialSpec& spec, double s_max, int samples) {
  if (!(s_max > spec.s0())) throw PreconditionError("check_assumptions: s_max must exceed s0");
  if (samples < 100) throw PreconditionError("check_assumptions: need at least 100 samples");

  AssumptionReport rep;
  rep.s_max = s_max;
  rep.samples = samples;

  // Positivity on a uniform sample of [0, s_max].
  double w_min = 0.0;
  double w_arg = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = s_max * k / (samples - 1);
    const double w = spec.w(s);
    if (w < w_min) {
      w_min = w;
      w_arg = s;
    }
  }
  if (spec.w(spec.s0()) < 0.0) w_arg = spec.s0();
  rep.w_positive = {w_min >= -1e-12, w_arg};

  // W(s)/s^2 -> m2/2 at the origin.
  double worst = 0.0;
  for (double s : {1e-4, 1e-5}) {
    const double ratio = spec.w(s) / (s * s);
    worst = std::max(worst, std::abs(ratio - 0.5 * spec.m2()) / (0.5 * spec.m2()));
  }
  rep.nondegenerate = {worst < 1e-2, worst};

  const double n_s0 = spec.n(spec.s0());
  rep.hylomorphy = {n_s0 < 0.0, n_s0};

  // Growth (a): least-squares fit of |N'(s)| ~ a s^{p-1} + b s^{2-2/p} on
  // log-spaced samples, then the fitted bound must hold up to a factor 10.
  if (auto p = spec.growth_exponent(); p && *p > 2.0 && *p < 6.0) {
    std::vector<double> s_vals;
    const double lo = std::log(1e-6 * s_max);
    const double hi = std::log(s_max);
    for (int k = 0; k < samples; ++k) s_vals.push_back(std::exp(lo + (hi - lo) * k / (samples - 1)));
    // Relative least squares: minimize sum ((a x + b y - t)/t)^2 over a, b >= 0.
    double sxx = 0, sxy = 0, syy = 0, sxt = 0, syt = 0;
    for (double s : s_vals) {
      const double t = std::abs(spec.n_prime(s));
      if (t <= 0.0) continue;
      const double x = std::pow(s, *p - 1.0) / t;
      const double y = std::pow(s, 2.0 - 2.0 / *p) / t;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
      sxt += x;
      syt += y;
    }
    double a = 0.0, b = 0.0;
    const double det = sxx * syy - sxy * sxy;
    if (det > 0.0) {
      a = (sxt * syy - syt * sxy) / det;
      b = (syt * sxx - sxt * sxy) / det;
    }
    if (a < 0.0 || b < 0.0) {
      // Clamp one coefficient to zero and refit the other.
      if (a < 0.0) {
        a = 0.0;
        b = syy > 0.0 ? std::max(0.0, syt / syy) : 0.0;
      } else {
        b = 0.0;
        a = sxx > 0.0 ? std::max(0.0, sxt / sxx) : 0.0;
      }
    }
    if (a == 0.0 && b == 0.0) {
      // N' vanishes identically on the samples; any positive bound works.
      a = b = 1.0;
    }
    double worst_ratio = 0.0;
    for (double s : s_vals) {
      const double bound = a * std::pow(s, *p - 1.0) + b * std::pow(s, 2.0 - 2.0 / *p);
      const double t = std::abs(spec.n_prime(s));
      worst_ratio = std::max(worst_ratio, bound > 0.0 ? t / bound : std::numeric_limits<double>::infinity());
    }
    rep.growth_a = {worst_ratio <= 10.0, worst_ratio};
    rep.growth_a_coeff = a;
    rep.growth_b_coeff = b;
  } else {
    rep.growth_a = {false, std::numeric_limits<double>::quiet_NaN()};
  }

  if (auto s1 = spec.s1()) {
    const double d = spec.n_prime(*s1);
    rep.growth_b = {*s1 > spec.s0() && d >= 0.0, d};
  } else {
    rep.growth_b = {false, std::numeric_limits<double>::quiet_NaN()};
  }

  // omega0 = inf_u sqrt(max(0, 2W(u)/u^2)): 1024 log-spaced samples, then Brent.
  const auto g = [&spec](double u) { return std::sqrt(std::max(0.0, 2.0 * spec.w(u) / (u * u))); };
  constexpr int kOmegaSamples = 1024;
  std::vector<double> us(kOmegaSamples);
  const double lo = std::log(1e-6 * s_max);
  const double hi = std::log(s_max);
  for (int k = 0; k < kOmegaSamples; ++k) us[k] = std::exp(lo + (hi - lo) * k / (kOmegaSamples - 1));
  int best = 0;
  for (int k = 1; k < kOmegaSamples; ++k)
    if (g(us[k]) < g(us[best])) best = k;
  double omega0 = g(us[best]);
  double arg = us[best];
  if (omega0 > 0.0) {
    const double a = us[std::max(0, best - 1)];
    const double b = us[std::min(kOmegaSamples - 1, best + 1)];
    auto [x, fx] = boost::math::tools::brent_find_minima(g, a, b, 52);
    if (fx < omega0) {
      omega0 = fx;
      arg = x;
    }
  }
  const double m = spec.mass();
  if (omega0 > m || std::abs(omega0 - m) <= 1e-12 * m) omega0 = m;
  rep.omega0 = omega0;
  rep.omega0_argmin = arg;
  return rep;
}

PotentialSpec truncate(const PotentialSpec& spec, double s1) {
  if (!(s1 > 0.0)) throw PreconditionError("truncate: s1 must be positive");
  const double slope = spec.n_prime(s1);
  if (slope < 0.0) throw PreconditionError("truncate: requires N'(s1) >= 0");
  const double n_s1 = spec.n(s1);
  const double c1 = n_s1 - slope * s1;
  auto n = spec.n_evaluator();
  auto dn = spec.n_prime_evaluator();
  PotentialSpec::Scalar n_t = [n, s1, slope, c1](double s) { return s <= s1 ? n(s) : slope * s + c1; };
  PotentialSpec::Scalar dn_t = [dn, s1, slope](double s) { return s <= s1 ? dn(s) : slope; };
  return PotentialSpec(spec.name() + "~", spec.m2(), std::move(n_t), std::move(dn_t), spec.s0(), s1,
                       spec.growth_exponent());
}

namespace potentials {

PotentialSpec wref() {
  return PotentialSpec(
      "wref", 1.0, [](double s) { return s * s * s * (0.5 * s - 1.0); },
      [](double s) { return s * s * (2.0 * s - 3.0); }, 1.0, 1.5, 4.0);
}

PotentialSpec wbad() {
  return PotentialSpec(
      "wbad", 1.0, [](double s) { return -0.25 * s * s * s * s; }, [](double s) { return -s * s * s; },
      2.0, std::nullopt, 4.0);
}

PotentialSpec wfree(double m2) {
  return PotentialSpec(
      "wfree", m2, [](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 1.5, 4.0);
}

PotentialSpec polynomial(const std::map<int, double>& coefficients, double m2, double s0,
                         std::optional<double> s1, std::optional<double> p) {
  for (const auto& [deg, c] : coefficients)
    if (deg < 3) throw ConfigError("polynomial N: every degree must be >= 3 (got " + std::to_string(deg) + ")");
  std::vector<std::pair<int, double>> terms(coefficients.begin(), coefficients.end());
  auto n = [terms](double s) {
    double acc = 0.0;
    for (const auto& [deg, c] : terms) acc += c * std::pow(s, deg);
    return acc;
  };
  auto dn = [terms](double s) {
    double acc = 0.0;
    for (const auto& [deg, c] : terms) acc += c * deg * std::pow(s, deg - 1);
    return acc;
  };
  return PotentialSpec("polynomial", m2, n, dn, s0, s1, p);
}

PotentialSpec builtin(const std::string& name) {
  if (name == "wref") return wref();
  if (name == "wbad") return wbad();
  if (name == "wfree") return wfree();
  throw ConfigError("unknown builtin potential '" + name + "' (expected wref, wbad, wfree)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("potential file: key '" + key + "' expects a real number, got '" + v + "'");
  }
}

}  // namespace

PotentialSpec parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("potential file: expected key=value, got '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const auto kind = kv.count("kind") ? kv.at("kind") : std::string{};
  if (kind == "builtin") {
    if (!kv.count("name")) throw ConfigError("potential file: builtin requires name=");
    return builtin(kv.at("name"));
  }
  if (kind != "polynomial") throw ConfigError("potential file: kind must be builtin or polynomial");
  for (const char* key : {"m2", "s0", "coefficients"})
    if (!kv.count(key)) throw ConfigError(std::string("potential file: missing ") + key);

  std::map<int, double> coeffs;
  std::istringstream cs(kv.at("coefficients"));
  std::string item;
  while (std::getline(cs, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("potential file: coefficient '" + item + "' is not degree:value");
    int deg = 0;
    try {
      deg = std::stoi(trim(item.substr(0, colon)));
    } catch (const std::exception&) {
      throw ConfigError("potential file: bad degree in '" + item + "'");
    }
    coeffs[deg] += to_double("coefficients", trim(item.substr(colon + 1)));
  }
  if (coeffs.empty()) throw ConfigError("potential file: no coefficients");
  std::optional<double> s1, p;
  if (kv.count("s1")) s1 = to_double("s1", kv.at("s1"));
  if (kv.count("p")) p = to_double("p", kv.at("p"));
  try {
    return polynomial(coeffs, to_double("m2", kv.at("m2")), to_double("s0", kv.at("s0")), s1, p);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

PotentialSpec load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

PotentialSpec resolve(const std::string& ref) {
  constexpr std::string_view prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) return builtin(ref.substr(prefix.size()));
  return load_file(ref);
}

}  // namespace potentials

}  // namespace hylo
