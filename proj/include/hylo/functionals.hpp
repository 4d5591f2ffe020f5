#pragma once

#include "hylo/grid.hpp"
#include "hylo/potential.hpp"

#include <memory>

namespace hylo {

/// Immutable bundle on which J, K, E, H, Lambda and their gradients are evaluated.
///
/// coupling_q = 0 gives the plain Klein-Gordon functionals; q > 0 replaces K
/// by the electrostatically screened K_q (dim = 3, ell = 0 only).
class FunctionalContext {
public:
  FunctionalContext(RadialGrid grid, PotentialSpec potential, double coupling_q = 0.0);

  const RadialGrid& grid() const { return grid_; }
  const PotentialSpec& potential() const { return potential_; }
  double coupling_q() const { return q_; }

  /// Weak form of L1 = -Delta_r + ell^2 / r^2 + m2.
  const SymTridiagonal& l1() const { return cache_->l1; }
  /// Weak form of -Delta_r (ell = 0 closure), used by the gauge solve.
  const SymTridiagonal& laplacian() const { return cache_->laplacian; }
  std::span<const double> weights() const { return cache_->weights; }

private:
  struct Cache {
    SymTridiagonal l1;
    SymTridiagonal laplacian;
    std::vector<double> weights;
  };
  RadialGrid grid_;
  PotentialSpec potential_;
  double q_;
  std::shared_ptr<const Cache> cache_;
};

struct EnergyBreakdown {
  double gradient_term = 0.0;
  double mass_term = 0.0;
  double centrifugal_term = 0.0;
  double nonlinear_term = 0.0;
  double omega_term = 0.0;

  double total() const { return gradient_term + mass_term + centrifugal_term + nonlinear_term + omega_term; }
};

/// J(u) = 1/2 <L1 u, u> + int N(u).  N is extended evenly to u < 0.
double functional_j(const FunctionalContext& ctx, const Field& u);
/// K(u) = 1/2 int u^2, or K_q(u) when the context carries a coupling.
double functional_k(const FunctionalContext& ctx, const Field& u);

/// E(u, omega) = J(u) + omega^2 K(u).
double energy(const FunctionalContext& ctx, const Field& u, double omega);
/// H(u, omega) = 2 omega K(u).
double charge(const FunctionalContext& ctx, const Field& u, double omega);
/// Lambda = E / H = (J / (K omega) + omega) / 2; requires omega > 0 and K(u) > 0.
double hylomorphy_ratio(const FunctionalContext& ctx, const Field& u, double omega);

EnergyBreakdown energy_breakdown(const FunctionalContext& ctx, const Field& u, double omega);

/// Gradients in the weighted L2 inner product, i.e. inner(grad_j(u), v) is the
/// exact directional derivative of the discrete J along v.
Field grad_j(const FunctionalContext& ctx, const Field& u);
Field grad_k(const FunctionalContext& ctx, const Field& u);

}  // namespace hylo
