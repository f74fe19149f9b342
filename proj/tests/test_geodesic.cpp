#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "multiwell/geodesic.hpp"

using namespace multiwell;

namespace {

const double kGL = 4.0 * std::sqrt(2.0) / 3.0;

// For W = |z|^2 in the plane, 2 sqrt(W) |dz| = |d(z^2)|, so for x, y in the
// sector |arg z| < pi/4 the distance is |x^2 - y^2| (complex squares).
double quadratic_geod(const Point& x, const Point& y) {
  const std::complex<double> a(x[0], x[1]), b(y[0], y[1]);
  return std::abs(a * a - b * b);
}

}  // namespace

TEST_SUITE("geodesic") {

TEST_CASE("gl1d: both routes reproduce 4 sqrt(2) / 3") {
  const auto W = PotentialSpec::ginzburg_landau();
  const Point x{-1.0}, y{1.0};
  const auto grid = geod_grid_oracle(W, x, y, Box::cube(1, -1.5, 1.5), 4000);
  CHECK(grid.value == doctest::Approx(kGL).epsilon(1e-5));
  const auto upper = geod_upper(W, x, y);
  CHECK(upper.converged);
  CHECK(upper.value == doctest::Approx(kGL).epsilon(1e-5));
}

TEST_CASE("quadratic potential: relaxed geodesic matches |x^2 - y^2|") {
  const auto W = PotentialSpec::quadratic(2);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> r(0.3, 1.5), th(-0.7, 0.7);
  for (int k = 0; k < 5; ++k) {
    const double r1 = r(rng), a1 = th(rng), r2 = r(rng), a2 = th(rng);
    const Point x{r1 * std::cos(a1), r1 * std::sin(a1)};
    const Point y{r2 * std::cos(a2), r2 * std::sin(a2)};
    const auto g = geod_upper(W, x, y);
    CHECK(g.value == doctest::Approx(quadratic_geod(x, y)).epsilon(1e-4));
  }
}

TEST_CASE("quadratic potential: grid oracle along lattice directions") {
  const auto W = PotentialSpec::quadratic(2);
  const Box box = Box::cube(2, -2, 2);
  const Point o{0.0, 0.0};
  CHECK(geod_grid_oracle(W, o, Point{1.2, 0.0}, box, 400).value == doctest::Approx(1.44).epsilon(1e-4));
  CHECK(geod_grid_oracle(W, o, Point{0.8, 0.8}, box, 400).value == doctest::Approx(1.28).epsilon(1e-4));
}

TEST_CASE("grid oracle: identity, symmetry and triangle inequality") {
  const auto W = PotentialSpec::four_well(2.0);
  const GridGraph g(W, Box::cube(2, -2, 2), 100);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.8, 1.8);
  auto pt = [&] { return Point{U(rng), U(rng)}; };
  for (int k = 0; k < 15; ++k) {
    const Point x = pt(), y = pt(), z = pt();
    CHECK(geod_grid_oracle(g, W, x, x).value == 0.0);
    const double xy = geod_grid_oracle(g, W, x, y).value;
    CHECK(geod_grid_oracle(g, W, y, x).value == xy);
    const double yz = geod_grid_oracle(g, W, y, z).value;
    const double xz = geod_grid_oracle(g, W, x, z).value;
    CHECK(xz <= xy + yz + 1e-12);
  }
}

TEST_CASE("grid oracle does not increase under resolution doubling") {
  const auto W = PotentialSpec::four_well(2.0);
  const Point x{-1.0, 0.0}, y{1.0, 0.0};
  double prev = kInfinity;
  for (int res : {50, 100, 200, 400}) {
    const double v = geod_grid_oracle(W, x, y, Box::cube(2, -2, 2), res).value;
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("four-well: relaxed and grid values are close and go around the saddle") {
  const auto W = PotentialSpec::four_well(2.0);
  GeodesicOptions o;
  o.perturbation = 0.5;
  const auto up = geod_upper(W, Point{-1.0, 0.0}, Point{1.0, 0.0}, o);
  const auto grid = geod_grid_oracle(W, Point{-1.0, 0.0}, Point{1.0, 0.0}, Box::cube(2, -2, 2), 400);
  CHECK(std::abs(up.value - grid.value) < 2e-2);
  // Through the well at (0, +-1): twice the adjacent distance.
  const auto half = geod_upper(W, Point{-1.0, 0.0}, Point{0.0, 1.0});
  CHECK(up.value == doctest::Approx(2 * half.value).epsilon(1e-4));
  CHECK(up.value < kGL);
}

TEST_CASE("non-degeneracy lower bound holds on separated pairs") {
  const auto W = PotentialSpec::four_well(2.0);
  const auto wells = find_wells(W, Box::cube(2, -3, 3), 121);
  const Box box = Box::cube(2, -2, 2);
  const double delta = 0.5;
  const auto nb = nondegeneracy_bound(W, wells, delta, box, 200);
  CHECK(nb.c_delta > 0.0);
  CHECK(nb.bound == doctest::Approx(delta * std::sqrt(nb.c_delta) / 4));
  const GridGraph g(W, box, 200);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.9, 1.9);
  int tested = 0;
  while (tested < 10) {
    const Point x{U(rng), U(rng)}, y{U(rng), U(rng)};
    if (distance(x, y) < delta) continue;
    ++tested;
    CHECK(geod_grid_oracle(g, W, x, y).value >= nb.bound - 1e-6);
  }
}

TEST_CASE("energy-geodesic bound rejects mismatched endpoints") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto ref = geod_upper(W, Point{-1.0}, Point{1.0});
  const auto c = Curve::segment(Point{-1.0}, Point{0.5}, -1, 1, 10);
  CHECK_THROWS_AS(verify_energy_geodesic_bound(c, W, ref), InvalidArgument);
}

TEST_CASE("total variation along a monotone profile equals the end-to-end distance") {
  const auto W = PotentialSpec::ginzburg_landau();
  std::vector<double> s;
  for (int k = 0; k <= 400; ++k) s.push_back(std::tanh((-10 + 20.0 * k / 400) / std::sqrt(2.0)));
  const Curve c(-10, 10, 1, s);
  OracleOptions o;
  o.box = Box::cube(1, -1.5, 1.5);
  o.resolution = 3000;
  const double tv = total_variation_geod(c, W, {0, 100, 200, 300, 400}, o);
  CHECK(tv == doctest::Approx(kGL).epsilon(1e-4));
}

}
