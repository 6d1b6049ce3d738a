#pragma once

#include <cstdint>
#include <iosfwd>

namespace trusteq {

/// Runs the built-in oracle checks (Shapley enumeration vs Kernel SHAP,
/// efficiency, LIME recovery on an additive game, calibration fixtures and
/// Jaccard properties), printing one PASS/FAIL line each. Returns true when
/// all pass.
bool run_selftest(std::ostream& out, std::uint64_t seed = 7);

}  // namespace trusteq
