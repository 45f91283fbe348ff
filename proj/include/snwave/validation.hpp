#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace snwave::validation {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;   ///< the worst observed value
    double threshold = 0.0;  ///< pass iff measured <= threshold
};

/// Runs the full invariant suite on small fixed desk problems.  Deterministic
/// for a fixed seed.
std::vector<CheckResult> run_suite(std::uint64_t seed);

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace snwave::validation
