#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "multiwell/curve.hpp"
#include "multiwell/cylinder.hpp"
#include "multiwell/potential.hpp"

namespace multiwell {

/// printf("%.17g"): round-trips every double, and is identical across runs.
std::string format_double(double x);

nlohmann::json potential_to_json(const PotentialSpec& spec);
/// Accepts {"name", "dimension", "offset", "terms": [{"coeff", "exponents"}],
/// "box_mask": {"lo", "hi"}}; "offset" and "box_mask" are optional.
PotentialSpec potential_from_json(const nlohmann::json& j);
/// A built-in name ("gl1d", "fourwell:2", ...) or the path of a JSON spec.
PotentialSpec load_potential(const std::string& name_or_path);

nlohmann::json wells_to_json(const std::vector<Well>& wells);

/// Header t,x1,...,xN and one row per node.
std::string curve_csv(const Curve& curve);
Curve parse_curve_csv(const std::string& text);

/// Header x1,y1..yk,u1..uN (y the section coordinates), one row per node.
std::string field_csv(const CylinderField& u);
nlohmann::json field_sidecar(const CylinderField& u, const std::string& spec_name,
                             std::uint64_t seed);
/// One row per slice: x1, dist/sup_dist per well, average, slice_e, kinetic
/// and the optional columns when any slice has them.
std::string slices_csv(const std::vector<SliceDiagnostics>& slices);

std::string sha256_hex(std::string_view data);
std::string read_text_file(const std::filesystem::path& path);

/// Output directory that records every file it writes with its digest.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  /// (file name, sha256) in write order.
  const std::vector<std::pair<std::string, std::string>>& inventory() const {
    return inventory_;
  }

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::string>> inventory_;
};

}  // namespace multiwell
