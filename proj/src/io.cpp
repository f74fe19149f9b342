#include "multiwell/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace multiwell {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json potential_to_json(const PotentialSpec& spec) {
  json terms = json::array();
  for (const auto& t : spec.terms()) terms.push_back({{"coeff", t.coeff}, {"exponents", t.exponents}});
  json j = {{"name", spec.name()},
            {"dimension", spec.dimension()},
            {"offset", spec.offset()},
            {"terms", terms}};
  if (spec.box_mask()) j["box_mask"] = {{"lo", spec.box_mask()->lo}, {"hi", spec.box_mask()->hi}};
  return j;
}

PotentialSpec potential_from_json(const json& j) {
  try {
    if (!j.is_object()) throw InvalidArgument("potential definition must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "name" && key != "dimension" && key != "offset" && key != "terms" &&
          key != "box_mask") {
        throw InvalidArgument("unknown potential key '" + key + "'");
      }
    }
    std::vector<MonomialTerm> terms;
    for (const auto& t : j.at("terms")) {
      for (const auto& [key, _] : t.items()) {
        if (key != "coeff" && key != "exponents") {
          throw InvalidArgument("unknown term key '" + key + "'");
        }
      }
      terms.push_back({t.at("coeff").get<double>(), t.at("exponents").get<std::vector<int>>()});
    }
    std::optional<Box> mask;
    if (j.contains("box_mask") && !j["box_mask"].is_null()) {
      mask = Box{j["box_mask"].at("lo").get<Point>(), j["box_mask"].at("hi").get<Point>()};
    }
    return PotentialSpec(j.at("name").get<std::string>(), j.at("dimension").get<std::size_t>(),
                         std::move(terms), j.value("offset", 0.0), std::move(mask));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed potential definition: ") + e.what());
  }
}

PotentialSpec load_potential(const std::string& name_or_path) {
  if (fs::is_regular_file(name_or_path)) {
    json j;
    try {
      j = json::parse(read_text_file(name_or_path));
    } catch (const json::parse_error& e) {
      throw InvalidArgument("potential file '" + name_or_path + "': " + e.what());
    }
    return potential_from_json(j);
  }
  return PotentialSpec::from_name(name_or_path);
}

json wells_to_json(const std::vector<Well>& wells) {
  json out = json::array();
  for (const auto& w : wells) {
    out.push_back({{"location", w.location},
                   {"residual", w.residual},
                   {"basin_radius", w.basin_radius}});
  }
  return out;
}

std::string curve_csv(const Curve& curve) {
  std::string s = "t";
  for (std::size_t i = 0; i < curve.dimension(); ++i) s += ",x" + std::to_string(i + 1);
  s += '\n';
  for (std::size_t k = 0; k < curve.nodes(); ++k) {
    s += format_double(curve.t(k));
    for (double x : curve.node(k)) s += ',' + format_double(x);
    s += '\n';
  }
  return s;
}

Curve parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,", 0) != 0) {
    throw InvalidArgument("curve CSV: missing 't,x1,...' header");
  }
  const auto n = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::vector<double> ts, samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument("curve CSV: bad number '" + cell + "'");
      }
    }
    if (vals.size() != n + 1) throw InvalidArgument("curve CSV: wrong column count");
    ts.push_back(vals[0]);
    samples.insert(samples.end(), vals.begin() + 1, vals.end());
  }
  if (ts.size() < 2) throw InvalidArgument("curve CSV: need at least two rows");
  return Curve(ts.front(), ts.back(), n, std::move(samples));
}

std::string field_csv(const CylinderField& u) {
  const std::size_t S = u.grid.section.node_count();
  const int k = u.grid.section.axes();
  std::string s = "x1";
  for (int a = 0; a < k; ++a) s += ",y" + std::to_string(a + 1);
  for (std::size_t c = 0; c < u.dimension; ++c) s += ",u" + std::to_string(c + 1);
  s += '\n';
  std::vector<std::vector<double>> coords(S);
  for (std::size_t j = 0; j < S; ++j) coords[j] = u.grid.section.coordinates(j);
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    const std::string x1 = format_double(u.grid.x1(i));
    for (std::size_t j = 0; j < S; ++j) {
      s += x1;
      for (double y : coords[j]) s += ',' + format_double(y);
      for (double v : u.at(i, j)) s += ',' + format_double(v);
      s += '\n';
    }
  }
  return s;
}

json field_sidecar(const CylinderField& u, const std::string& spec_name, std::uint64_t seed) {
  json j = {{"L", u.grid.L},
            {"M1", u.grid.M1},
            {"section", {{"kind", to_string(u.grid.section.kind())},
                         {"points", u.grid.section.points_per_axis()},
                         {"axes", u.grid.section.axes()}}},
            {"dimension", u.dimension},
            {"potential", spec_name},
            {"end_condition", to_string(u.grid.end_condition)},
            {"seed", seed}};
  if (u.grid.end_condition == EndCondition::clamped_to_wells) {
    j["w_minus"] = u.grid.w_minus;
    j["w_plus"] = u.grid.w_plus;
  }
  return j;
}

std::string slices_csv(const std::vector<SliceDiagnostics>& slices) {
  if (slices.empty()) return "x1\n";
  const std::size_t nw = slices.front().dist_to_well.size();
  const std::size_t n = slices.front().average.size();
  bool has_div = false, has_a = false;
  for (const auto& d : slices) {
    has_div = has_div || d.div_residual.has_value();
    has_a = has_a || d.average_first_component.has_value();
  }
  std::string s = "x1";
  for (std::size_t w = 0; w < nw; ++w) s += ",dist_w" + std::to_string(w);
  for (std::size_t w = 0; w < nw; ++w) s += ",sup_dist_w" + std::to_string(w);
  for (std::size_t c = 0; c < n; ++c) s += ",avg" + std::to_string(c + 1);
  s += ",slice_e,kinetic";
  if (has_a) s += ",avg_first";
  if (has_div) s += ",div_residual";
  s += '\n';
  for (const auto& d : slices) {
    s += format_double(d.x1);
    for (double v : d.dist_to_well) s += ',' + format_double(v);
    for (double v : d.sup_dist_to_well) s += ',' + format_double(v);
    for (double v : d.average) s += ',' + format_double(v);
    s += ',' + format_double(d.slice_e) + ',' + format_double(d.kinetic);
    if (has_a) s += ',' + (d.average_first_component ? format_double(*d.average_first_component) : "");
    if (has_div) s += ',' + (d.div_residual ? format_double(*d.div_residual) : "");
    s += '\n';
  }
  return s;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw InvalidArgument("cannot create output directory '" + root_.string() + "'");
  }
}

void OutputDir::write(const std::string& name, const std::string& content) {
  std::ofstream out(root_ / name, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + (root_ / name).string() + "'");
  out << content;
  out.close();
  inventory_.emplace_back(name, sha256_hex(content));
}

void OutputDir::write_json(const std::string& name, const json& j) {
  write(name, j.dump(2) + "\n");
}

}  // namespace multiwell
