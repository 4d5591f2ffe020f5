#include "hylo/verify.hpp"

#include <cstdio>

int main() {
  hylo::VerifyOptions opt;
  opt.suite = hylo::Suite::Fast;
  int failed = 0;
  hylo::run_verification(opt, [&](const hylo::CriterionResult& r) {
    std::printf("%s criterion %-3s %-24s %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    failed += !r.pass;
  });
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
