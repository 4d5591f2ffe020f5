#pragma once

#include "hylo/functionals.hpp"
#include "hylo/minimizer.hpp"

namespace hylo {

/// Solution of -Delta Phi + q^2 u^2 Phi = q u^2 (Dirichlet at r_max).
/// The physical scalar potential is phi = omega * Phi.
struct GaugeProfile {
  Field phi_cap;
  double q = 0.0;
  double source_norm = 0.0;  // int u^2
  double max_q_phi = 0.0;
  /// Normwise backward error of the discrete gauge solve.
  double residual = 0.0;
};

/// Direct tridiagonal solve; throws Error if q Phi >= 1 anywhere.
GaugeProfile solve_phi(const RadialGrid& grid, const Field& u, double q);

/// K_q(u) = 1/2 int (1 - q Phi_u) u^2.
double k_q(const FunctionalContext& ctx, const Field& u);
/// K_q'(u) = (1 - q Phi_u)^2 u.
Field grad_k_q(const FunctionalContext& ctx, const Field& u);

struct KqEvaluation {
  double value = 0.0;
  Field gradient;
  GaugeProfile gauge;
};
/// K_q, its gradient and the gauge profile from a single solve.
KqEvaluation evaluate_k_q(const FunctionalContext& ctx, const Field& u);

/// q int Phi_u u^2 = int u^2 - 2 K_q(u): the screening correction to K.
double screening_correction(const RadialGrid& grid, const Field& u, double q);

struct GaugeEnergyIdentity {
  double field_energy = 0.0;   // int |grad phi|^2
  double coupling_term = 0.0;  // int q phi Omega u^2, Omega = omega - q phi
};

/// Both sides of int |grad phi_u|^2 = int q phi_u Omega u^2 at the solved gauge.
GaugeEnergyIdentity gauge_energy_identity(const RadialGrid& grid, const Field& u, double q, double omega);

struct CoupledSolution {
  Field u;
  double omega = 0.0;
  GaugeProfile gauge;
  double q = 0.0;
  double sigma = 0.0;
  double energy = 0.0;
  double charge = 0.0;
  double lambda_ratio = 0.0;
  double multiplier = 0.0;
  /// Relative residual of -Delta u + W'(u) = (omega - q phi)^2 u.
  double residual_u = 0.0;
  /// Normwise backward error of -Delta phi = q (omega - q phi) u^2.
  double residual_phi = 0.0;
  double min_omega_eff = 0.0;  // min over r of omega - q phi
  int iterations = 0;
  SolutionRecord record;
};

/// Minimizes E on the charge manifold with K replaced by K_q, then
/// reconstructs phi = omega Phi_u and checks both field equations.
CoupledSolution coupled_minimize(const FunctionalContext& ctx, const MinimizeConfig& config);

/// Strong-form residual fields of the two reduced equations at (u, omega).
struct CoupledResiduals {
  double residual_u = 0.0;
  double residual_phi = 0.0;
};
CoupledResiduals coupled_residuals(const FunctionalContext& ctx, const Field& u, double omega);

}  // namespace hylo
