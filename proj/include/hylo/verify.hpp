#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hylo {

enum class Suite { Fast, All };

struct VerifyOptions {
  Suite suite = Suite::Fast;
  /// Multiplies every tolerance; values other than 1 are for failure drills.
  double tolerance_scale = 1.0;
};

struct CriterionResult {
  std::string id;    // "1".."13" for the acceptance criteria, "x1".. for extended checks
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

/// Runs the acceptance criteria (plus the extended checks for Suite::All).
/// `on_result` is called as each criterion finishes.
std::vector<CriterionResult> run_verification(const VerifyOptions& options,
                                              const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace hylo
