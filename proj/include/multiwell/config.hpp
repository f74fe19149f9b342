#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "multiwell/common.hpp"

namespace multiwell {

/// Bad flags, bad config file, or a value outside its allowed range.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Command { wells, heteroclinic, geodesic, avgpot, keps, cylinder, verify_all };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

/// Effective configuration of one run. Every field is a key of the JSON
/// config schema and has a `--key` flag of the same name.
struct RunConfig {
  Command command = Command::verify_all;
  std::string potential = "gl1d";
  std::string out = "out";
  std::uint64_t seed = 0;
  int jobs = 1;

  // Heteroclinic.
  double T = 10.0;
  std::size_t M = 2000;
  double perturbation = 0.0;
  double het_tol = 1e-8;

  // Geodesic. Endpoints default to the first and last well.
  std::optional<Point> from;
  std::optional<Point> to;
  std::size_t geod_M = 800;
  int resolution = 400;
  int stencil_radius = 1;
  double box_scale = 1.5;

  // Section: "auto" is the interval for N = 1 and the torus otherwise.
  std::string section = "auto";
  /// 0 selects 65 on the interval and 64 on the torus.
  int P = 0;
  int axes = 1;

  // Averaged potential.
  double z_max = 2.0;
  int z_count = 21;
  int restarts = 3;
  int vtable_resolution = 16;

  // k_eps.
  std::vector<double> eps = {0.4, 0.2, 0.1, 0.05};
  std::optional<double> a;

  // Cylinder.
  double L = 10.0;
  std::size_t M1 = 801;
  std::string end = "neumann_ends";
  std::string initial = "heteroclinic_extension";
  double amplitude = 0.2;
  double width = 2.0;
  double dt = 0.1;
  std::size_t max_steps = 20000;
  double residual_tol = 1e-5;
  double trace_tol = 1e-2;
  /// End-sensitivity rerun at rerun_factor * L; 0 disables it.
  double rerun_factor = 1.5;
  std::size_t holder_pairs = 200;
  std::size_t jensen_fields = 20;
};

/// Schema keys with their default values.
nlohmann::json config_defaults();

nlohmann::json config_to_json(const RunConfig& c);
/// Rejects unknown keys and values of the wrong type or range.
RunConfig config_from_json(const nlohmann::json& j);

/// Parses JSON text; syntax errors report line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

struct ParsedArgs {
  std::optional<RunConfig> config;
  /// Help or version text when no run was requested.
  std::string message;
};

/// `<command> [--config file] [--key value ...]`: defaults, then the config
/// file, then flags. List values are comma separated (--eps 0.2,0.1).
ParsedArgs parse_args(const std::vector<std::string>& args);

}  // namespace multiwell
