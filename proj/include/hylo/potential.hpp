#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace hylo {

/// Nonlinear self-interaction W(s) = m2/2 s^2 + N(s) on s >= 0.
///
/// N and N' are supplied as evaluators.  Construction checks N(0) = N'(0) = 0,
/// m2 > 0, and compares N' against central differences of N at 32 points
/// (relative tolerance 1e-6), so an inconsistent derivative fails immediately.
class PotentialSpec {
public:
  using Scalar = std::function<double(double)>;

  PotentialSpec(std::string name, double m2, Scalar n_eval, Scalar n_prime, double s0,
                std::optional<double> s1 = std::nullopt, std::optional<double> p = std::nullopt);

  const std::string& name() const { return name_; }
  double m2() const { return m2_; }
  double mass() const;
  double s0() const { return s0_; }
  std::optional<double> s1() const { return s1_; }
  std::optional<double> growth_exponent() const { return p_; }

  double n(double s) const { return n_eval_(s); }
  double n_prime(double s) const { return n_prime_(s); }

  /// W(s); throws DomainError for s < 0.
  double w(double s) const;
  /// W'(s); throws DomainError for s < 0.
  double w_prime(double s) const;

  const Scalar& n_evaluator() const { return n_eval_; }
  const Scalar& n_prime_evaluator() const { return n_prime_; }

private:
  std::string name_;
  double m2_;
  Scalar n_eval_;
  Scalar n_prime_;
  double s0_;
  std::optional<double> s1_;
  std::optional<double> p_;
};

double eval_w(const PotentialSpec& spec, double s);

struct CheckOutcome {
  bool pass = false;
  double witness = 0.0;  // meaning depends on the check, see AssumptionReport
};

/// Sampled verdict on the positivity, nondegeneracy, hylomorphy and growth
/// assumptions, plus the lower frequency edge omega0.
struct AssumptionReport {
  CheckOutcome w_positive;    // witness: s0 if W(s0) < 0, else argmin of W over the samples
  CheckOutcome nondegenerate; // witness: worst relative error of W(s)/s^2 against m2/2
  CheckOutcome hylomorphy;    // witness: N(s0)
  CheckOutcome growth_a;      // witness: worst bound ratio |N'| / (a s^{p-1} + b s^{2-2/p})
  CheckOutcome growth_b;      // witness: N'(s1)
  double growth_a_coeff = 0.0;
  double growth_b_coeff = 0.0;
  double omega0 = 0.0;
  double omega0_argmin = 0.0;
  double s_max = 0.0;
  int samples = 0;

  bool growth() const { return growth_a.pass || growth_b.pass; }
  bool all_pass() const {
    return w_positive.pass && nondegenerate.pass && hylomorphy.pass && growth();
  }
};

AssumptionReport check_assumptions(const PotentialSpec& spec, double s_max, int samples = 1000);

/// Linear continuation of N beyond s1: N~(s) = N'(s1) s + N(s1) - N'(s1) s1.
PotentialSpec truncate(const PotentialSpec& spec, double s1);

namespace potentials {

/// W(s) = s^2 (1 - s)^2 / 2, i.e. m2 = 1, N(s) = -s^3 + s^4 / 2; s0 = 1, s1 = 1.5, p = 4.
PotentialSpec wref();
/// W(s) = s^2 / 2 - s^4 / 4, negative for s > sqrt(2).
PotentialSpec wbad();
/// Free field, N = 0.
PotentialSpec wfree(double m2 = 1.0);
/// N(s) = sum_k c_k s^k with every degree >= 3.
PotentialSpec polynomial(const std::map<int, double>& coefficients, double m2, double s0,
                         std::optional<double> s1 = std::nullopt,
                         std::optional<double> p = std::nullopt);

PotentialSpec builtin(const std::string& name);

/// Parses the key=value potential file format (see README).
PotentialSpec parse(const std::string& text);
PotentialSpec load_file(const std::string& path);
/// Resolves "builtin:<name>" or a file path.
PotentialSpec resolve(const std::string& ref);

}  // namespace potentials

}  // namespace hylo
