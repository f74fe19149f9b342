#include "doctest.h"

#include <cmath>

#include "multiwell/cylinder.hpp"

using namespace multiwell;

namespace {

const double kGL = 4.0 * std::sqrt(2.0) / 3.0;

Curve tanh_curve(double T, std::size_t M) {
  std::vector<double> s;
  for (std::size_t k = 0; k <= M; ++k) s.push_back(std::tanh((-T + 2 * T * k / M) / std::sqrt(2.0)));
  return Curve(-T, T, 1, s);
}

CylinderField gl_field(double L, std::size_t M1, int P, std::uint64_t seed, double amp) {
  CylinderGrid g(L, M1, SectionGrid::interval(P));
  auto u = make_heteroclinic_extension(g, tanh_curve(L, 4 * (M1 - 1)));
  return amp > 0 ? make_perturbed(u, seed, amp) : u;
}

const std::vector<Well>& gl_wells() {
  static const std::vector<Well> w = {Well{{-1.0}}, Well{{1.0}}};
  return w;
}

}  // namespace

TEST_SUITE("cylinder") {

TEST_CASE("constant field has energy 2L W(c)") {
  const auto W = PotentialSpec::four_well(2.0);
  CylinderGrid g(3.0, 31, SectionGrid::torus(16));
  const Point c{0.4, 0.7};
  const auto u = make_constant(g, c);
  CHECK(cylinder_energy(u, W) == doctest::Approx(6.0 * W.value(c)).epsilon(1e-13));
  CHECK(axial_kinetic_energy(u) == 0.0);
  CHECK(holder_check(u, 50, 1) == 0.0);
}

TEST_CASE("tanh extension carries the heteroclinic energy") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto u = gl_field(10, 2001, 9, 0, 0.0);
  CHECK(cylinder_energy(u, W) == doctest::Approx(kGL).epsilon(1e-5));
}

TEST_CASE("slice decomposition reproduces the energy") {
  const auto W = PotentialSpec::ginzburg_landau();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto u = gl_field(5, 101, 17, s, 0.5);
    const double E = cylinder_energy(u, W);
    CHECK(std::abs(E - slice_decomposition_energy(u, W)) <= 1e-9 * E);
  }
}

TEST_CASE("perturbation vanishes on the end slices and has the requested size") {
  const auto base = gl_field(5, 101, 17, 0, 0.0);
  const auto u = make_perturbed(base, 3, 0.25);
  double sup = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) sup = std::max(sup, std::abs(u.values[k] - base.values[k]));
  CHECK(sup == doctest::Approx(0.25));
  for (std::size_t j = 0; j < 17; ++j) {
    CHECK(u.at(0, j)[0] == base.at(0, j)[0]);
    CHECK(u.at(100, j)[0] == base.at(100, j)[0]);
  }
}

TEST_CASE("Hoelder ratio stays below 1 + 5 h1 on random fields") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto u = gl_field(5, 101, 17, s, 0.5);
    CHECK(holder_check(u, 200, s) <= 1.0 + 5.0 * u.grid.h1());
  }
}

TEST_CASE("Jensen margin is nonnegative up to tolerance") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto g = SectionGrid::interval(17);
  const auto V = VTable::build(W, g, Box::cube(1, -2, 2), 16);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto u = gl_field(5, 101, 17, s, 0.5);
    CHECK(jensen_check(u, W, V, -5, 5) >= -5e-3);
    CHECK(jensen_check(u, W, V, -1, 2) >= -5e-3);
  }
}

TEST_CASE("relaxation decreases energy and reaches a stationary kink") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto u0 = gl_field(8, 321, 17, 1, 0.2);
  RunReport rep;
  const auto u = relax(u0, W, {}, rep);
  for (std::size_t i = 1; i < rep.energy_history.size(); ++i) {
    CHECK(rep.energy_history[i] <= rep.energy_history[i - 1] + 1e-12 * (1 + rep.energy_history[0]));
  }
  CHECK(rep.converged);
  CHECK(rep.residual <= 1e-5);
  CHECK(stationarity_residual(u, W) == doctest::Approx(rep.residual));
  CHECK(rep.final_energy == doctest::Approx(kGL).epsilon(1e-3));
  const auto v = trace_convergence_verdict(slice_diagnostics(u, W, gl_wells()), gl_wells());
  CHECK(v.pass);
  CHECK(v.well_minus == 0);
  CHECK(v.well_plus == 1);
}

TEST_CASE("clamped ends stay on the wells") {
  const auto W = PotentialSpec::ginzburg_landau();
  CylinderGrid g(6, 121, SectionGrid::interval(9), EndCondition::clamped_to_wells, Point{-1.0},
                 Point{1.0});
  auto u0 = make_perturbed(make_heteroclinic_extension(g, tanh_curve(6, 480)), 2, 0.3);
  for (std::size_t j = 0; j < 9; ++j) {
    u0.at(0, j)[0] = -1.0;
    u0.at(120, j)[0] = 1.0;
  }
  RunReport rep;
  const auto u = relax(u0, W, {}, rep);
  for (std::size_t j = 0; j < 9; ++j) {
    CHECK(u.at(0, j)[0] == -1.0);
    CHECK(u.at(120, j)[0] == 1.0);
  }
  CHECK(rep.converged);
}

TEST_CASE("clamped ends must match the wells") {
  const auto W = PotentialSpec::ginzburg_landau();
  CylinderGrid g(6, 121, SectionGrid::interval(9), EndCondition::clamped_to_wells, Point{-1.0},
                 Point{1.0});
  RunReport rep;
  CHECK_THROWS_AS(relax(make_constant(g, Point{0.0}), W, {}, rep), InvalidArgument);
}

TEST_CASE("stream-function perturbation is divergence-free with constant first average") {
  const auto W = PotentialSpec::four_well(2.0);
  CylinderGrid g(6, 241, SectionGrid::torus(32));
  std::vector<double> s;
  for (int k = 0; k <= 960; ++k) {
    s.push_back(0.0);
    s.push_back(std::tanh((-6 + 12.0 * k / 960) / std::sqrt(2.0)));
  }
  const auto base = make_heteroclinic_extension(g, Curve(-6, 6, 2, s));
  const auto u = make_divfree_harmonic(base, 0.2, 1.5);
  const std::vector<Well> wells = {Well{{0.0, -1.0}}, Well{{0.0, 1.0}}};
  for (const auto& d : slice_diagnostics(u, W, wells, 0.0)) {
    CHECK(std::abs(*d.average_first_component) <= 1e-10);
    CHECK(*d.div_residual <= 1e-10);
  }
  CHECK_THROWS_AS(make_divfree_harmonic(gl_field(5, 101, 17, 0, 0.0), 0.2, 1.5), InvalidArgument);
}

TEST_CASE("projected relaxation keeps the first average") {
  const auto W = PotentialSpec::four_well(2.0);
  CylinderGrid g(5, 101, SectionGrid::torus(16));
  std::vector<double> s;
  for (int k = 0; k <= 400; ++k) {
    s.push_back(0.0);
    s.push_back(std::tanh((-5 + 10.0 * k / 400) / std::sqrt(2.0)));
  }
  const auto u0 = make_perturbed(make_heteroclinic_extension(g, Curve(-5, 5, 2, s)), 9, 0.3);
  RelaxOptions o;
  o.first_component_average = 0.0;
  o.max_steps = 200;
  RunReport rep;
  const auto u = relax(u0, W, o, rep);
  for (std::size_t i = 0; i < g.M1; ++i) CHECK(std::abs(u.slice(i).mean()[0]) < 1e-12);
}

TEST_CASE("trace verdict flags a field that does not settle") {
  const auto W = PotentialSpec::ginzburg_landau();
  CylinderGrid g(5, 101, SectionGrid::interval(9));
  const auto u = make_constant(g, Point{0.2});
  const auto v = trace_convergence_verdict(slice_diagnostics(u, W, gl_wells()), gl_wells());
  CHECK_FALSE(v.pass);
  CHECK_FALSE(v.failures.empty());
}

TEST_CASE("initial kinds round-trip through their names") {
  for (auto k : {InitialKind::constant_well, InitialKind::heteroclinic_extension, InitialKind::perturbed,
                 InitialKind::two_connection_interp, InitialKind::divfree_harmonic}) {
    CHECK(initial_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(initial_kind_from_string("x"), InvalidArgument);
}

}
