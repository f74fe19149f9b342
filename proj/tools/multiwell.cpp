#include <cstdio>
#include <string>
#include <vector>

#include "multiwell/config.hpp"
#include "multiwell/run.hpp"

int main(int argc, char** argv) {
  using namespace multiwell;
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    const ParsedArgs parsed = parse_args(args);
    if (!parsed.config) {
      std::fputs(parsed.message.c_str(), stdout);
      return kExitPass;
    }
    cfg = *parsed.config;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "multiwell: %s\n", e.what());
    return kExitConfigError;
  }

  const RunOutcome outcome = run(cfg);
  const auto& m = outcome.manifest;
  if (m.contains("error")) {
    std::fprintf(stderr, "multiwell: %s\n", m["error"].get<std::string>().c_str());
  }
  if (m.contains("verdicts")) {
    for (const auto& [name, v] : m["verdicts"].items()) {
      std::printf("%-36s %s  margin=%.6g\n", name.c_str(), v["pass"].get<bool>() ? "PASS" : "FAIL",
                  v["margin"].is_number() ? v["margin"].get<double>() : 0.0);
    }
  }
  std::printf("manifest: %s/manifest.json (status %d)\n", cfg.out.c_str(), outcome.status);
  return outcome.status;
}
