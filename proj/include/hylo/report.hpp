#pragma once

#include "hylo/analysis.hpp"
#include "hylo/maxwell.hpp"
#include "hylo/minimizer.hpp"
#include "hylo/potential.hpp"
#include "hylo/shooting.hpp"

#include <json.hpp>

namespace hylo {

using json = nlohmann::ordered_json;

/// Finite values as numbers; NaN and infinities as the strings "nan", "inf", "-inf".
json finite_number(double x);

json to_json(const RadialGrid& grid);
json to_json(const AssumptionReport& report);
json to_json(const EnergyBreakdown& breakdown);
/// Keys: sigma, omega, energy, charge, lambda_ratio, multiplier, residual,
/// iterations, c_hat_estimate, in_sigma_set, then diagnostics.
json to_json(const SolutionRecord& record);
json to_json(const CoupledSolution& solution);
json to_json(const ShootResult& result);
json to_json(const CrossValidation& cv);
json to_json(const BoostSpec& spec);
json to_json(const HylomorphyCertificate& cert);
json to_json(const SigmaScanEntry& entry);

/// Lowercase hex of a 64-bit fingerprint.
std::string hex64(std::uint64_t value);

}  // namespace hylo
