#include "hylo/functionals.hpp"

#include "hylo/errors.hpp"
#include "hylo/maxwell.hpp"

#include <cmath>

namespace hylo {

FunctionalContext::FunctionalContext(RadialGrid grid, PotentialSpec potential, double coupling_q)
    : grid_(grid), potential_(std::move(potential)), q_(coupling_q) {
  if (!(q_ >= 0.0) || !std::isfinite(q_)) throw PreconditionError("FunctionalContext: coupling q must be >= 0");
  if (q_ > 0.0 && (grid_.dim() != 3 || grid_.ell() != 0))
    throw PreconditionError("FunctionalContext: electrostatic coupling requires dim = 3, ell = 0");
  auto cache = std::make_shared<Cache>();
  cache->l1 = l1_matrix(grid_, potential_.m2());
  cache->laplacian = stiffness_matrix(RadialGrid(grid_.dim(), 0, grid_.r_max(), grid_.n_nodes()));
  cache->weights.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) cache->weights[i] = grid_.weight(i);
  cache_ = std::move(cache);
}

namespace {

double n_even(const PotentialSpec& w, double s) { return w.n(std::abs(s)); }
double n_prime_odd(const PotentialSpec& w, double s) {
  return s < 0.0 ? -w.n_prime(-s) : w.n_prime(s);
}

double quadratic_form(const SymTridiagonal& a, std::span<const double> u) {
  const std::size_t n = u.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a.diag[i] * u[i] * u[i];
    if (i + 1 < n) acc += 2.0 * a.off[i] * u[i] * u[i + 1];
  }
  return acc;
}

}  // namespace

double functional_j(const FunctionalContext& ctx, const Field& u) {
  require_same_grid(ctx.grid(), u.grid(), "J");
  const auto w = ctx.weights();
  double nonlinear = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) nonlinear += w[i] * n_even(ctx.potential(), u[i]);
  return 0.5 * quadratic_form(ctx.l1(), u.values()) + nonlinear;
}

double functional_k(const FunctionalContext& ctx, const Field& u) {
  require_same_grid(ctx.grid(), u.grid(), "K");
  if (ctx.coupling_q() > 0.0) return k_q(ctx, u);
  return 0.5 * inner(u, u);
}

double energy(const FunctionalContext& ctx, const Field& u, double omega) {
  return functional_j(ctx, u) + omega * omega * functional_k(ctx, u);
}

double charge(const FunctionalContext& ctx, const Field& u, double omega) {
  return 2.0 * omega * functional_k(ctx, u);
}

double hylomorphy_ratio(const FunctionalContext& ctx, const Field& u, double omega) {
  if (!(omega > 0.0)) throw PreconditionError("Lambda: requires omega > 0");
  const double k = functional_k(ctx, u);
  if (!(k > 0.0)) throw PreconditionError("Lambda: requires K(u) > 0 (hylomorphy ratio undefined)");
  return 0.5 * (functional_j(ctx, u) / (k * omega) + omega);
}

EnergyBreakdown energy_breakdown(const FunctionalContext& ctx, const Field& u, double omega) {
  require_same_grid(ctx.grid(), u.grid(), "energy_breakdown");
  EnergyBreakdown b;
  const double l2 = static_cast<double>(ctx.grid().ell()) * ctx.grid().ell();
  b.gradient_term = 0.5 * dirichlet_form(u);
  b.centrifugal_term = 0.5 * l2 * centrifugal_form(u);
  b.mass_term = 0.5 * ctx.potential().m2() * inner(u, u);
  const auto w = ctx.weights();
  for (std::size_t i = 0; i < u.size(); ++i) b.nonlinear_term += w[i] * n_even(ctx.potential(), u[i]);
  b.omega_term = omega * omega * functional_k(ctx, u);
  return b;
}

Field grad_j(const FunctionalContext& ctx, const Field& u) {
  require_same_grid(ctx.grid(), u.grid(), "grad_J");
  const auto w = ctx.weights();
  Field g(ctx.grid(), ctx.l1().multiply(u.values()));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] / w[i] + n_prime_odd(ctx.potential(), u[i]);
  return g;
}

Field grad_k(const FunctionalContext& ctx, const Field& u) {
  require_same_grid(ctx.grid(), u.grid(), "grad_K");
  if (ctx.coupling_q() > 0.0) return grad_k_q(ctx, u);
  return u;
}

}  // namespace hylo
