#include "hylo/report.hpp"

#include <cmath>
#include <cstdio>

namespace hylo {

json finite_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

json to_json(const RadialGrid& grid) {
  return {{"dim", grid.dim()},
          {"ell", grid.ell()},
          {"r_max", finite_number(grid.r_max())},
          {"n_nodes", grid.n_nodes()},
          {"h", finite_number(grid.h())},
          {"fingerprint", hex64(grid.fingerprint())}};
}

namespace {

json outcome(const CheckOutcome& c) { return {{"pass", c.pass}, {"witness", finite_number(c.witness)}}; }

}  // namespace

json to_json(const AssumptionReport& r) {
  return {{"w_positive", outcome(r.w_positive)},
          {"nondegenerate", outcome(r.nondegenerate)},
          {"hylomorphy", outcome(r.hylomorphy)},
          {"growth_a", outcome(r.growth_a)},
          {"growth_b", outcome(r.growth_b)},
          {"growth_a_coeff", finite_number(r.growth_a_coeff)},
          {"growth_b_coeff", finite_number(r.growth_b_coeff)},
          {"omega0", finite_number(r.omega0)},
          {"omega0_argmin", finite_number(r.omega0_argmin)},
          {"s_max", finite_number(r.s_max)},
          {"samples", r.samples},
          {"all_pass", r.all_pass()}};
}

json to_json(const EnergyBreakdown& b) {
  return {{"gradient_term", finite_number(b.gradient_term)},
          {"mass_term", finite_number(b.mass_term)},
          {"centrifugal_term", finite_number(b.centrifugal_term)},
          {"nonlinear_term", finite_number(b.nonlinear_term)},
          {"omega_term", finite_number(b.omega_term)}};
}

json to_json(const SolutionRecord& r) {
  return {{"sigma", finite_number(r.sigma)},
          {"omega", finite_number(r.omega)},
          {"energy", finite_number(r.energy)},
          {"charge", finite_number(r.charge)},
          {"lambda_ratio", finite_number(r.lambda_ratio)},
          {"multiplier", finite_number(r.multiplier)},
          {"residual", finite_number(r.residual)},
          {"iterations", r.iterations},
          {"c_hat_estimate", finite_number(r.c_hat_estimate)},
          {"in_sigma_set", r.in_sigma_set},
          {"frequency_band_ok", r.frequency_band_ok},
          {"omega_above_mass", r.omega_above_mass},
          {"rayleigh_min", finite_number(r.rayleigh_min)},
          {"max_energy_increase", finite_number(r.max_energy_increase)},
          {"max_charge_error", finite_number(r.max_charge_error)}};
}

json to_json(const CoupledSolution& s) {
  json j = to_json(s.record);
  j["q"] = finite_number(s.q);
  j["max_q_phi"] = finite_number(s.gauge.max_q_phi);
  j["residual_phi"] = finite_number(s.residual_phi);
  j["residual_u"] = finite_number(s.residual_u);
  j["min_omega_eff"] = finite_number(s.min_omega_eff);
  j["gauge_solve_residual"] = finite_number(s.gauge.residual);
  return j;
}

json to_json(const ShootResult& r) {
  return {{"omega", finite_number(r.omega)},
          {"shoot_param", finite_number(r.shoot_param)},
          {"decay_rate", finite_number(r.decay_rate)},
          {"residual", finite_number(r.residual)},
          {"bisection_steps", r.bisection_steps},
          {"cutoff_radius", finite_number(r.cutoff_radius)},
          {"energy", finite_number(r.energy)},
          {"charge", finite_number(r.charge)}};
}

json to_json(const CrossValidation& cv) {
  return {{"l2_distance", finite_number(cv.l2_distance)},
          {"energy_difference", finite_number(cv.energy_difference)},
          {"omega_mismatch", finite_number(cv.omega_mismatch)},
          {"comparable", cv.comparable},
          {"pass", cv.pass}};
}

json to_json(const BoostSpec& b) {
  return {{"v", finite_number(b.v)},
          {"gamma", finite_number(b.gamma)},
          {"omega", finite_number(b.omega)},
          {"omega_v", finite_number(b.omega_v)},
          {"k_v", json::array({finite_number(b.k_v[0]), finite_number(b.k_v[1]), finite_number(b.k_v[2])})}};
}

json to_json(const HylomorphyCertificate& c) {
  json entries = json::array();
  for (const auto& e : c.entries)
    entries.push_back({{"radius", finite_number(e.radius)},
                       {"ratio", finite_number(e.ratio)},
                       {"gradient_share", finite_number(e.gradient_share)}});
  return {{"entries", entries},
          {"first_radius", c.first_radius ? finite_number(*c.first_radius) : json(nullptr)},
          {"limit_ratio", finite_number(c.limit_ratio)},
          {"pass", c.pass}};
}

json to_json(const SigmaScanEntry& e) {
  json j = {{"sigma", finite_number(e.sigma)},
            {"status", e.status},
            {"lambda_min", finite_number(e.lambda_min)},
            {"omega", finite_number(e.omega)},
            {"in_sigma", e.in_sigma}};
  if (!e.message.empty()) j["message"] = e.message;
  if (e.record) j["record"] = to_json(*e.record);
  return j;
}

}  // namespace hylo
