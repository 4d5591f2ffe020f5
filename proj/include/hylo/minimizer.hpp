#pragma once

#include "hylo/errors.hpp"
#include "hylo/functionals.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hylo {

/// Starting profile for the descent.
struct InitSpec {
  enum class Kind { TestFunction, Gaussian, File };
  Kind kind = Kind::TestFunction;
  /// TestFunction: plateau radius R (<= 0 picks R so that the initial
  /// frequency sigma / 2K is m / 2).  Gaussian: width.
  double param = 0.0;
  std::string path;

  static InitSpec test_function(double radius = 0.0) { return {Kind::TestFunction, radius, {}}; }
  static InitSpec gaussian(double width) { return {Kind::Gaussian, width, {}}; }
  static InitSpec file(std::string path) { return {Kind::File, 0.0, std::move(path)}; }
};

struct MinimizeConfig {
  double sigma = 0.0;
  double tol_residual = 1e-8;
  int max_iters = 200000;
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  InitSpec init;
  /// Precomputed c-hat; estimated from the context when absent.
  std::optional<double> c_hat;
  /// Skip the c-hat estimate entirely (in_sigma_set is then decided against m only).
  bool estimate_c_hat = true;
  /// Keep every accepted reduced-energy value in SolutionRecord::energy_trace.
  bool keep_trace = false;

  void validate() const;
};

struct SolutionRecord {
  Field u;
  double sigma = 0.0;
  double omega = 0.0;
  double energy = 0.0;
  double charge = 0.0;
  double lambda_ratio = 0.0;
  /// Lagrange multiplier of E' = lambda (omega K', K), the normalization in
  /// which stationarity reads lambda = 2 omega.
  double multiplier = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double c_hat_estimate = 0.0;
  bool in_sigma_set = false;
  /// 0 < omega < sqrt(rayleigh_min) on this grid.
  bool frequency_band_ok = false;
  /// omega exceeds m by more than 1 %: sigma is likely outside Sigma.
  bool omega_above_mass = false;
  double rayleigh_min = 0.0;
  /// Largest increase of the reduced energy over accepted steps (round-off level).
  double max_energy_increase = 0.0;
  /// Largest relative charge-constraint violation over accepted iterates.
  double max_charge_error = 0.0;
  std::vector<double> energy_trace;
};

/// Thrown when the descent hits max_iters or stalls; carries the last state.
class MinimizeNonConvergence : public ConvergenceError {
public:
  MinimizeNonConvergence(const std::string& what, SolutionRecord last)
      : ConvergenceError(what), last_(std::move(last)) {}
  const SolutionRecord& last() const { return last_; }

private:
  SolutionRecord last_;
};

struct ReducedEnergy {
  double value = 0.0;
  double omega = 0.0;
};

/// E restricted to the charge manifold: omega = sigma / 2K(u), value = J + sigma^2 / 4K.
ReducedEnergy reduced_energy(const FunctionalContext& ctx, const Field& u, double sigma);
/// Gradient of the reduced energy: grad J - omega^2 grad K.
Field reduced_energy_gradient(const FunctionalContext& ctx, const Field& u, double sigma);

Field initial_profile(const FunctionalContext& ctx, const InitSpec& init, double sigma);

SolutionRecord minimize(const FunctionalContext& ctx, const MinimizeConfig& config);

struct CHatEstimate {
  double c_hat = 0.0;
  /// Smallest J/K found.
  double ratio_inf = 0.0;
  int starts = 0;
};

/// c-hat = inf over omega >= m of Lambda, via descent on J/K from a fixed list
/// of initial profiles.
CHatEstimate estimate_c_hat(const FunctionalContext& ctx);

struct SigmaScanEntry {
  double sigma = 0.0;
  std::string status;  // "converged", "nonconvergence", "vanishing_charge", "error"
  std::string message;
  double lambda_min = 0.0;
  double omega = 0.0;
  bool in_sigma = false;
  std::optional<SolutionRecord> record;
};

/// Runs minimize for each sigma (sorted ascending) with a shared c-hat
/// estimate; failures are recorded per entry.  jobs > 1 runs in parallel.
std::vector<SigmaScanEntry> sigma_scan(const FunctionalContext& ctx, std::vector<double> sigmas,
                                       const MinimizeConfig& base, int jobs = 1);

/// in_Sigma classification margin against the c-hat estimate.
inline constexpr double kSigmaSetMargin = 0.01;

}  // namespace hylo
