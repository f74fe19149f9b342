#pragma once

#include "json.hpp"
#include "multiwell/config.hpp"

namespace multiwell {

inline constexpr int kExitPass = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalAbort = 3;

struct RunOutcome {
  int status = kExitPass;
  /// Also written to <out>/manifest.json.
  nlohmann::json manifest;
};

/// Runs the command's pipeline, writes its CSV/JSON files and manifest.json
/// under config.out, and maps the verdicts to an exit status. Every random
/// choice is derived from config.seed.
RunOutcome run(const RunConfig& config);

/// Independent seed for a named stage, derived from the root seed.
std::uint64_t stage_seed(std::uint64_t root, std::uint64_t stage);

}  // namespace multiwell
