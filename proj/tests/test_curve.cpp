#include "doctest.h"

#include <cmath>
#include <random>

#include "multiwell/curve.hpp"

using namespace multiwell;

namespace {

const double kGL = 4.0 * std::sqrt(2.0) / 3.0;

Curve tanh_curve(double T, std::size_t M, double shift = 0.0) {
  std::vector<double> s;
  for (std::size_t k = 0; k <= M; ++k) {
    const double t = -T + 2 * T * k / M;
    s.push_back(std::tanh((t - shift) / std::sqrt(2.0)));
  }
  return Curve(-T, T, 1, s);
}

Curve random_curve(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const std::size_t M = 400;
  std::vector<double> coef(3 * n);
  for (auto& c : coef) c = g(rng);
  std::vector<double> s;
  for (std::size_t k = 0; k <= M; ++k) {
    const double x = static_cast<double>(k) / M;
    for (std::size_t i = 0; i < n; ++i) {
      double v = -1.0 + 2.0 * x;
      for (int m = 0; m < 3; ++m) v += coef[3 * i + m] * std::sin((m + 1) * M_PI * x) / (m + 1);
      s.push_back(v);
    }
  }
  return Curve(-5, 5, n, s);
}

}  // namespace

TEST_SUITE("curve") {

TEST_CASE("tanh profile has energy 4 sqrt(2) / 3 and equipartition") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto e = curve_energy(tanh_curve(10, 4000), W);
  CHECK(e.total == doctest::Approx(kGL).epsilon(1e-5));
  CHECK(std::abs(e.kinetic - e.potential) < 1e-4);
  CHECK(e.geodesic_length == doctest::Approx(kGL).epsilon(1e-5));
}

TEST_CASE("energy dominates length segment by segment") {
  const auto W = PotentialSpec::four_well(2.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto c = random_curve(2, s);
    const auto e = curve_energy(c, W);
    CHECK(e.total >= e.geodesic_length - 1e-12);
    CHECK(e.total == doctest::Approx(e.kinetic + e.potential));
  }
}

TEST_CASE("geodesic length is invariant under reparametrization") {
  const auto W = PotentialSpec::four_well(2.0);
  const auto c = random_curve(2, 3);
  Curve slow(-50, 50, 2, c.samples());
  CHECK(geodesic_length(slow, W) == doctest::Approx(geodesic_length(c, W)).epsilon(1e-14));
}

TEST_CASE("arclength reparametrization gives equal chords") {
  const auto c = random_curve(2, 5);
  const auto r = arclength_reparametrize(c, 200);
  std::vector<double> chords;
  for (std::size_t k = 0; k < r.segments(); ++k) chords.push_back(distance(r.node(k), r.node(k + 1)));
  const auto [lo, hi] = std::minmax_element(chords.begin(), chords.end());
  CHECK(*hi - *lo < 1e-3 * *hi);
  CHECK(distance(r.node(0), c.node(0)) == 0.0);
  CHECK(distance(r.node(r.segments()), c.node(c.segments())) == 0.0);
}

TEST_CASE("heteroclinic minimizer matches the tanh profile") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto res = minimize_heteroclinic(W, Point{-1.0}, Point{1.0}, 10, 2000);
  CHECK_FALSE(res.not_converged);
  CHECK(res.energy.total == doctest::Approx(kGL).epsilon(5e-4));
  // Centre at the zero crossing, then compare with tanh.
  double t0 = 0.0;
  for (std::size_t k = 0; k + 1 < res.curve.nodes(); ++k) {
    const double a = res.curve.node(k)[0], b = res.curve.node(k + 1)[0];
    if (a <= 0.0 && b > 0.0) {
      t0 = res.curve.t(k) + res.curve.step() * a / (a - b);
      break;
    }
  }
  double sup = 0.0;
  for (std::size_t k = 0; k < res.curve.nodes(); ++k) {
    sup = std::max(sup, std::abs(res.curve.node(k)[0] - std::tanh((res.curve.t(k) - t0) / std::sqrt(2.0))));
  }
  CHECK(sup < 1e-3);
  CHECK(res.el_residual <= 10 * 1e-8 / res.curve.step());
}

TEST_CASE("stationarity residual vanishes only at critical curves") {
  const auto W = PotentialSpec::ginzburg_landau();
  const auto res = minimize_heteroclinic(W, Point{-1.0}, Point{1.0}, 8, 800);
  CHECK(euler_lagrange_residual(res.curve, W) < 1e-4);
  CHECK(euler_lagrange_residual(tanh_curve(8, 800, 0.5), W) < 1e-3);
  const auto line = Curve::segment(Point{-1.0}, Point{1.0}, -8, 8, 800);
  CHECK(euler_lagrange_residual(line, W) > 1e-2);
}

TEST_CASE("curve rejects mismatched samples") {
  CHECK_THROWS_AS(Curve(0, 1, 2, std::vector<double>(5, 0.0)), InvalidArgument);
}

}
