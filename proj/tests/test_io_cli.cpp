#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "multiwell/config.hpp"
#include "multiwell/io.hpp"
#include "multiwell/run.hpp"

using namespace multiwell;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("multiwell_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles print with 17 significant digits and round-trip") {
  for (double x : {0.1, -1.0 / 3.0, 6.02214076e23, 1e-300}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("sha256 of 'abc'") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("potential JSON round trip") {
  const auto W = PotentialSpec::four_well(2.0);
  const auto R = potential_from_json(potential_to_json(W));
  for (const Point& z : {Point{0.1, 0.2}, Point{-1.3, 0.8}}) CHECK(R.value(z) == W.value(z));
  CHECK_THROWS_AS(potential_from_json(nlohmann::json{{"name", "x"}, {"dimension", 1}, {"terms", {}}, {"extra", 1}}),
                  InvalidArgument);
}

TEST_CASE("potential file is loaded by path") {
  const auto dir = scratch("potential");
  fs::create_directories(dir);
  const auto path = dir / "w.json";
  OutputDir(dir).write_json("w.json", potential_to_json(PotentialSpec::ginzburg_landau()));
  const auto W = load_potential(path.string());
  CHECK(W.value(Point{0.0}) == doctest::Approx(0.5));
}

TEST_CASE("curve CSV round trip") {
  const Curve c = Curve::segment(Point{-1.0, 0.5}, Point{1.0, 0.25}, -2, 2, 7);
  const auto text = curve_csv(c);
  CHECK(text.rfind("t,x1,x2\n", 0) == 0);
  const Curve r = parse_curve_csv(text);
  CHECK(r.samples() == c.samples());
  CHECK(r.t_min() == -2);
  CHECK(r.t_max() == 2);
}

TEST_CASE("output directory records digests") {
  OutputDir out(scratch("out"));
  out.write("a.csv", "abc");
  REQUIRE(out.inventory().size() == 1);
  CHECK(out.inventory()[0].second == sha256_hex("abc"));
  CHECK(read_text_file(out.root() / "a.csv") == "abc");
}

}

TEST_SUITE("cli") {

TEST_CASE("defaults give a valid gl1d config") {
  const auto p = parse_args({"verify-all"});
  REQUIRE(p.config);
  CHECK(p.config->potential == "gl1d");
  CHECK(p.config->command == Command::verify_all);
  CHECK(config_from_json(config_to_json(*p.config)).L == p.config->L);
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch("cfg");
  OutputDir(dir).write_json("c.json", {{"L", 10.0}, {"seed", 4}});
  const auto p = parse_args({"cylinder", "--config", (dir / "c.json").string(), "--L", "15"});
  REQUIRE(p.config);
  CHECK(p.config->L == 15.0);
  CHECK(p.config->seed == 4);
  CHECK(config_to_json(*p.config)["L"] == 15.0);
}

TEST_CASE("list and optional flags") {
  const auto p = parse_args({"keps", "--eps", "0.3,0.1", "--a", "0", "--from", "-1,0"});
  REQUIRE(p.config);
  CHECK(p.config->eps == std::vector<double>{0.3, 0.1});
  CHECK(p.config->a == 0.0);
  CHECK(*p.config->from == Point{-1.0, 0.0});
}

TEST_CASE("malformed JSON reports line and column") {
  const auto dir = scratch("bad");
  OutputDir(dir).write("bad.json", "{\n  \"L\": 10,\n  oops\n}\n");
  try {
    parse_args({"cylinder", "--config", (dir / "bad.json").string()});
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.json:3:3") != std::string::npos);
  }
}

TEST_CASE("unknown keys, commands and bad values are rejected") {
  CHECK_THROWS_AS(config_from_json({{"Lx", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"L", "ten"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"M1", 3}}), ConfigError);
  CHECK_THROWS_AS(parse_args({"bogus"}), ConfigError);
  CHECK_THROWS_AS(parse_args({"wells", "--nope", "1"}), ConfigError);
  CHECK_THROWS_AS(parse_args({"wells", "--M", "2.5"}), ConfigError);
}

TEST_CASE("wells command lists the two gl1d wells") {
  RunConfig c;
  c.command = Command::wells;
  c.out = scratch("wells").string();
  const auto o = run(c);
  CHECK(o.status == kExitPass);
  const auto j = nlohmann::json::parse(read_text_file(fs::path(c.out) / "wells.json"));
  REQUIRE(j["wells"].size() == 2);
  CHECK(j["wells"][0]["location"][0].get<double>() == doctest::Approx(-1.0));
  CHECK(j["wells"][1]["location"][0].get<double>() == doctest::Approx(1.0));
  for (const auto& f : o.manifest["files"]) {
    CHECK(sha256_hex(read_text_file(fs::path(c.out) / f["file"].get<std::string>())) == f["sha256"]);
  }
}

TEST_CASE("heteroclinic command reports the gl1d energy") {
  RunConfig c;
  c.command = Command::heteroclinic;
  c.out = scratch("het").string();
  const auto o = run(c);
  CHECK(o.status == kExitPass);
  const double E = o.manifest["results"]["heteroclinic"]["energy"]["total"];
  CHECK(E == doctest::Approx(4 * std::sqrt(2.0) / 3).epsilon(1e-3));
}

TEST_CASE("unknown potential is a config error") {
  RunConfig c;
  c.command = Command::wells;
  c.potential = "nope";
  c.out = scratch("nope").string();
  CHECK(run(c).status == kExitConfigError);
}

TEST_CASE("stage seeds differ and are stable") {
  CHECK(stage_seed(0, 1) != stage_seed(0, 2));
  CHECK(stage_seed(7, 3) == stage_seed(7, 3));
}

}
