#include "multiwell/config.hpp"

#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "multiwell/cylinder.hpp"
#include "multiwell/io.hpp"
#include "multiwell/version.hpp"

namespace multiwell {

using nlohmann::json;

namespace {

enum class Kind { integer, number, string, list, optional_number, optional_list };

// Schema: key, kind, help.
struct Key {
  const char* name;
  Kind kind;
  const char* help;
};

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = {
      {"command", Kind::string, "wells|heteroclinic|geodesic|avgpot|keps|cylinder|verify-all"},
      {"potential", Kind::string, "built-in name (gl1d, fourwell:<lambda>) or potential JSON file"},
      {"out", Kind::string, "output directory"},
      {"seed", Kind::integer, "root seed"},
      {"jobs", Kind::integer, "threads for independent sub-runs"},
      {"T", Kind::number, "heteroclinic half-interval"},
      {"M", Kind::integer, "heteroclinic segments"},
      {"perturbation", Kind::number, "transverse bump of the initial segment"},
      {"het_tol", Kind::number, "heteroclinic gradient tolerance"},
      {"from", Kind::optional_list, "geodesic start point"},
      {"to", Kind::optional_list, "geodesic end point"},
      {"geod_M", Kind::integer, "segments of the relaxed geodesic"},
      {"resolution", Kind::integer, "grid oracle cells per axis"},
      {"stencil_radius", Kind::integer, "grid oracle stencil radius"},
      {"box_scale", Kind::number, "oracle box scale about the wells"},
      {"section", Kind::string, "auto|interval_neumann|torus"},
      {"P", Kind::integer, "section points per axis (0: default)"},
      {"axes", Kind::integer, "torus axes"},
      {"z_max", Kind::number, "averaged potential sample range [-z_max, z_max]"},
      {"z_count", Kind::integer, "averaged potential samples per axis"},
      {"restarts", Kind::integer, "random restarts per averaged potential value"},
      {"vtable_resolution", Kind::integer, "cells per axis of the V table"},
      {"eps", Kind::list, "k_eps ladder"},
      {"a", Kind::optional_number, "first-component average"},
      {"L", Kind::number, "cylinder half-length"},
      {"M1", Kind::integer, "axial nodes"},
      {"end", Kind::string, "neumann_ends|clamped_to_wells"},
      {"initial", Kind::string,
       "constant_well|heteroclinic_extension|perturbed|two_connection_interp|divfree_harmonic"},
      {"amplitude", Kind::number, "initial perturbation amplitude"},
      {"width", Kind::number, "axial width of the divergence-free perturbation"},
      {"dt", Kind::number, "relaxation time step"},
      {"max_steps", Kind::integer, "relaxation step limit"},
      {"residual_tol", Kind::number, "stationarity residual tolerance"},
      {"trace_tol", Kind::number, "trace convergence tolerance"},
      {"rerun_factor", Kind::number, "end-sensitivity rerun length factor (0: off)"},
      {"holder_pairs", Kind::integer, "slice pairs for the Hoelder check"},
      {"jensen_fields", Kind::integer, "random fields for the Jensen check"},
  };
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : schema()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw ConfigError("--" + key + ": bad number '" + cell + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--" + key + ": empty list");
  return out;
}

json flag_value(const Key& k, const std::string& text) {
  const std::string key = k.name;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError("--" + key + ": bad number '" + s + "'");
    return v;
  };
  switch (k.kind) {
    case Kind::integer: {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size()) {
        throw ConfigError("--" + key + ": bad integer '" + text + "'");
      }
      return v;
    }
    case Kind::number:
      return number(text);
    case Kind::string:
      return text;
    case Kind::list:
      return parse_list(key, text);
    case Kind::optional_number:
      if (text == "none" || text == "null") return nullptr;
      return number(text);
    case Kind::optional_list:
      if (text == "none" || text == "null") return nullptr;
      return parse_list(key, text);
  }
  return nullptr;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void check_kind(const Key& k, const json& v) {
  bool ok = false;
  switch (k.kind) {
    case Kind::integer:
      ok = v.is_number_integer();
      break;
    case Kind::number:
      ok = v.is_number();
      break;
    case Kind::string:
      ok = v.is_string();
      break;
    case Kind::list:
      ok = v.is_array();
      break;
    case Kind::optional_number:
      ok = v.is_null() || v.is_number();
      break;
    case Kind::optional_list:
      ok = v.is_null() || v.is_array();
      break;
  }
  if (ok && v.is_array()) {
    for (const auto& x : v) ok = ok && x.is_number();
  }
  if (!ok) throw ConfigError(std::string("config key '") + k.name + "' has the wrong type");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::wells:
      return "wells";
    case Command::heteroclinic:
      return "heteroclinic";
    case Command::geodesic:
      return "geodesic";
    case Command::avgpot:
      return "avgpot";
    case Command::keps:
      return "keps";
    case Command::cylinder:
      return "cylinder";
    case Command::verify_all:
      return "verify-all";
  }
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (auto c : {Command::wells, Command::heteroclinic, Command::geodesic, Command::avgpot,
                 Command::keps, Command::cylinder, Command::verify_all}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown command '" + s + "'");
}

json config_defaults() { return config_to_json(RunConfig{}); }

json config_to_json(const RunConfig& c) {
  auto opt_list = [](const std::optional<Point>& p) { return p ? json(*p) : json(nullptr); };
  return {
      {"command", to_string(c.command)},
      {"potential", c.potential},
      {"out", c.out},
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"T", c.T},
      {"M", c.M},
      {"perturbation", c.perturbation},
      {"het_tol", c.het_tol},
      {"from", opt_list(c.from)},
      {"to", opt_list(c.to)},
      {"geod_M", c.geod_M},
      {"resolution", c.resolution},
      {"stencil_radius", c.stencil_radius},
      {"box_scale", c.box_scale},
      {"section", c.section},
      {"P", c.P},
      {"axes", c.axes},
      {"z_max", c.z_max},
      {"z_count", c.z_count},
      {"restarts", c.restarts},
      {"vtable_resolution", c.vtable_resolution},
      {"eps", c.eps},
      {"a", c.a ? json(*c.a) : json(nullptr)},
      {"L", c.L},
      {"M1", c.M1},
      {"end", c.end},
      {"initial", c.initial},
      {"amplitude", c.amplitude},
      {"width", c.width},
      {"dt", c.dt},
      {"max_steps", c.max_steps},
      {"residual_tol", c.residual_tol},
      {"trace_tol", c.trace_tol},
      {"rerun_factor", c.rerun_factor},
      {"holder_pairs", c.holder_pairs},
      {"jensen_fields", c.jensen_fields},
  };
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  json m = config_defaults();
  for (const auto& [key, value] : j.items()) {
    const Key* k = find_key(key);
    if (!k) throw ConfigError("unknown config key '" + key + "'");
    check_kind(*k, value);
    m[key] = value;
  }
  RunConfig c;
  c.command = command_from_string(get<std::string>(m, "command"));
  c.potential = get<std::string>(m, "potential");
  c.out = get<std::string>(m, "out");
  require(m["seed"].get<long long>() >= 0, "seed must be >= 0");
  c.seed = get<std::uint64_t>(m, "seed");
  c.jobs = get<int>(m, "jobs");
  c.T = get<double>(m, "T");
  require(m["M"].get<long long>() >= 2, "M must be >= 2");
  c.M = get<std::size_t>(m, "M");
  c.perturbation = get<double>(m, "perturbation");
  c.het_tol = get<double>(m, "het_tol");
  if (!m["from"].is_null()) c.from = get<Point>(m, "from");
  if (!m["to"].is_null()) c.to = get<Point>(m, "to");
  require(m["geod_M"].get<long long>() >= 2, "geod_M must be >= 2");
  c.geod_M = get<std::size_t>(m, "geod_M");
  c.resolution = get<int>(m, "resolution");
  c.stencil_radius = get<int>(m, "stencil_radius");
  c.box_scale = get<double>(m, "box_scale");
  c.section = get<std::string>(m, "section");
  c.P = get<int>(m, "P");
  c.axes = get<int>(m, "axes");
  c.z_max = get<double>(m, "z_max");
  c.z_count = get<int>(m, "z_count");
  c.restarts = get<int>(m, "restarts");
  c.vtable_resolution = get<int>(m, "vtable_resolution");
  c.eps = get<std::vector<double>>(m, "eps");
  if (!m["a"].is_null()) c.a = get<double>(m, "a");
  c.L = get<double>(m, "L");
  require(m["M1"].get<long long>() >= 16, "M1 must be >= 16");
  c.M1 = get<std::size_t>(m, "M1");
  c.end = get<std::string>(m, "end");
  c.initial = get<std::string>(m, "initial");
  c.amplitude = get<double>(m, "amplitude");
  c.width = get<double>(m, "width");
  c.dt = get<double>(m, "dt");
  require(m["max_steps"].get<long long>() >= 1, "max_steps must be >= 1");
  c.max_steps = get<std::size_t>(m, "max_steps");
  c.residual_tol = get<double>(m, "residual_tol");
  c.trace_tol = get<double>(m, "trace_tol");
  c.rerun_factor = get<double>(m, "rerun_factor");
  require(m["holder_pairs"].get<long long>() >= 1, "holder_pairs must be >= 1");
  c.holder_pairs = get<std::size_t>(m, "holder_pairs");
  require(m["jensen_fields"].get<long long>() >= 0, "jensen_fields must be >= 0");
  c.jensen_fields = get<std::size_t>(m, "jensen_fields");

  require(c.jobs >= 1, "jobs must be >= 1");
  require(c.T > 0.0, "T must be > 0");
  require(c.het_tol > 0.0, "het_tol must be > 0");
  require(c.resolution >= 2, "resolution must be >= 2");
  require(c.stencil_radius >= 1 && c.stencil_radius <= 4, "stencil_radius must be in 1..4");
  require(c.box_scale >= 1.0, "box_scale must be >= 1");
  require(c.section == "auto" || c.section == "interval_neumann" || c.section == "torus",
          "section must be auto, interval_neumann or torus");
  require(c.P == 0 || c.P >= 8, "P must be 0 or >= 8");
  require(c.axes == 1 || c.axes == 2, "axes must be 1 or 2");
  require(c.z_max > 0.0 && c.z_count >= 2, "z_max must be > 0 and z_count >= 2");
  require(c.restarts >= 0, "restarts must be >= 0");
  require(c.vtable_resolution >= 1, "vtable_resolution must be >= 1");
  require(!c.eps.empty(), "eps must not be empty");
  for (double e : c.eps) require(e > 0.0, "eps values must be > 0");
  require(c.L > 0.0, "L must be > 0");
  require(c.end == "neumann_ends" || c.end == "clamped_to_wells",
          "end must be neumann_ends or clamped_to_wells");
  try {
    (void)initial_kind_from_string(c.initial);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  require(c.amplitude >= 0.0 && c.width > 0.0, "amplitude must be >= 0 and width > 0");
  require(c.dt > 0.0, "dt must be > 0");
  require(c.residual_tol > 0.0 && c.trace_tol > 0.0, "tolerances must be > 0");
  require(c.rerun_factor == 0.0 || c.rerun_factor > 1.0, "rerun_factor must be 0 or > 1");
  return c;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": malformed JSON: " + e.what());
  }
}

ParsedArgs parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Multi-well energies, geodesics and cylinder relaxations", "multiwell"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string command;
  std::string config_path;
  app.add_option("command", command, "command to run")->required();
  app.add_option("--config", config_path, "JSON config file");
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& k : schema()) {
    if (std::string(k.name) == "command") continue;
    opts[k.name] = app.add_option(std::string("--") + k.name, raw[k.name], k.help);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {std::nullopt, app.help()};
  } catch (const CLI::CallForVersion&) {
    return {std::nullopt, std::string(kVersion) + "\n"};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  json merged = json::object();
  if (!config_path.empty()) {
    std::string text;
    try {
      text = read_text_file(config_path);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    json file = parse_json_text(text, config_path);
    if (!file.is_object()) throw ConfigError(config_path + ": config must be a JSON object");
    merged = file;
  }
  for (const auto& k : schema()) {
    auto it = opts.find(k.name);
    if (it == opts.end() || it->second->count() == 0) continue;
    merged[k.name] = flag_value(k, raw[k.name]);
  }
  merged["command"] = command;
  return {config_from_json(merged), {}};
}

}  // namespace multiwell
