// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "multiwell/config.hpp"
#include "multiwell/cross_section.hpp"
#include "multiwell/curve.hpp"
#include "multiwell/cylinder.hpp"
#include "multiwell/geodesic.hpp"
#include "multiwell/io.hpp"
#include "multiwell/run.hpp"

using namespace multiwell;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const double kGL = 4.0 * std::sqrt(2.0) / 3.0;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

const PotentialSpec& gl() {
  static const PotentialSpec W = PotentialSpec::ginzburg_landau();
  return W;
}

const PotentialSpec& four() {
  static const PotentialSpec W = PotentialSpec::four_well(2.0);
  return W;
}

const std::vector<Well>& gl_wells() {
  static const auto w = find_wells(gl(), Box::cube(1, -3, 3), 601);
  return w;
}

const std::vector<Well>& four_wells() {
  static const auto w = find_wells(four(), Box::cube(2, -3, 3), 121);
  return w;
}

// Composite Simpson of 2 sqrt(W) over [a, b] on the real line.
double simpson_2sqrtW(double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double u = a + h * k;
    const double f = 2.0 * std::sqrt(0.5 * (1 - u * u) * (1 - u * u));
    s += f * (k == 0 || k == n ? 1 : (k % 2 ? 4 : 2));
  }
  return s * h / 3.0;
}

Curve tanh_curve(double T, std::size_t M) {
  std::vector<double> s;
  for (std::size_t k = 0; k <= M; ++k) s.push_back(std::tanh((-T + 2 * T * k / M) / std::sqrt(2.0)));
  return Curve(-T, T, 1, s);
}

// Smallest of the relaxed (best of three starts for N >= 2) and grid values.
GeodesicResult best_geod(const PotentialSpec& W, const Point& x, const Point& y,
                         const GridGraph* graph) {
  std::optional<GeodesicResult> best;
  std::vector<double> bumps = {0.0};
  if (W.dimension() >= 2) bumps = {0.0, 0.5, -0.5};
  for (double b : bumps) {
    GeodesicOptions o;
    o.perturbation = b;
    auto r = geod_upper(W, x, y, o);
    if (!best || r.value < best->value) best = std::move(r);
  }
  if (graph) {
    auto g = geod_grid_oracle(*graph, W, x, y);
    if (g.value < best->value) best = std::move(g);
  }
  return *best;
}

struct CylinderCase {
  std::optional<CylinderField> initial;
  std::optional<CylinderField> relaxed;
  RunReport report;
  std::vector<SliceDiagnostics> slices;
  TraceVerdict trace;
  double seconds = 0.0;
};

// GL on (-L, L) x (0, 1), P = 65, tanh extension plus 0.2 perturbation.
CylinderCase scalar_run(double L, std::size_t M1) {
  const auto t0 = Clock::now();
  CylinderCase c;
  CylinderGrid g(L, M1, SectionGrid::interval(65));
  c.initial = make_perturbed(make_heteroclinic_extension(g, tanh_curve(L, 4 * (M1 - 1))), 17, 0.2);
  c.relaxed = relax(*c.initial, gl(), {}, c.report);
  c.slices = slice_diagnostics(*c.relaxed, gl(), gl_wells());
  TraceOptions to;
  to.trace_tol = 1e-2;
  c.trace = trace_convergence_verdict(c.slices, gl_wells(), to);
  c.seconds = seconds_since(t0);
  return c;
}

const CylinderCase& scalar() {
  static const CylinderCase c = scalar_run(10, 801);
  return c;
}

const CylinderCase& scalar_long() {
  static const CylinderCase c = scalar_run(15, 1201);
  return c;
}

// Four-well on (-12, 12) x T, P = 64, stream-function perturbation of the
// connection (0, -1) -> (0, 1), which lies on the slice z_1 = a = 0.
const CylinderCase& slice_run() {
  static const CylinderCase c = [] {
    const auto t0 = Clock::now();
    CylinderCase c;
    CylinderGrid g(12, 801, SectionGrid::torus(64));
    const auto het = minimize_heteroclinic(four(), Point{0, -1}, Point{0, 1}, 12, 2400);
    c.initial = make_divfree_harmonic(make_heteroclinic_extension(g, het.curve), 0.2, 2.0);
    c.relaxed = relax(*c.initial, four(), {}, c.report);
    c.slices = slice_diagnostics(*c.relaxed, four(), four_wells(), 0.0);
    TraceOptions to;
    to.a = 0.0;
    to.a_tol = 1e-6;
    c.trace = trace_convergence_verdict(c.slices, four_wells(), to);
    c.seconds = seconds_since(t0);
    return c;
  }();
  return c;
}

// Four-well on (-10, 10) x T along the adjacent connection (-1, 0) -> (0, -1).
const CylinderCase& four_adjacent() {
  static const CylinderCase c = [] {
    const auto t0 = Clock::now();
    CylinderCase c;
    CylinderGrid g(10, 801, SectionGrid::torus(64));
    const auto het = minimize_heteroclinic(four(), Point{-1, 0}, Point{0, -1}, 10, 2000);
    c.initial = make_perturbed(make_heteroclinic_extension(g, het.curve), 23, 0.2);
    c.relaxed = relax(*c.initial, four(), {}, c.report);
    c.slices = slice_diagnostics(*c.relaxed, four(), four_wells());
    c.trace = trace_convergence_verdict(c.slices, four_wells());
    c.seconds = seconds_since(t0);
    return c;
  }();
  return c;
}

// 100 seeded GL fields near the kink, for the Jensen check.
const std::vector<CylinderField>& jensen_fields() {
  static const std::vector<CylinderField> f = [] {
    std::vector<CylinderField> out;
    CylinderGrid g(5, 201, SectionGrid::interval(33));
    const auto base = make_heteroclinic_extension(g, tanh_curve(5, 800));
    for (std::uint64_t k = 0; k < 100; ++k) {
      out.push_back(make_perturbed(base, 1000 + k, 0.1 + 0.1 * static_cast<double>(k % 5)));
    }
    return out;
  }();
  return f;
}

// 20 seeded fields far from any minimizer: constant wells plus O(1) noise.
const std::vector<std::pair<const PotentialSpec*, CylinderField>>& random_fields() {
  static const auto f = [] {
    std::vector<std::pair<const PotentialSpec*, CylinderField>> out;
    for (std::uint64_t k = 0; k < 20; ++k) {
      if (k % 2 == 0) {
        CylinderGrid g(4, 161, SectionGrid::interval(17));
        out.emplace_back(&gl(), make_perturbed(make_constant(g, Point{-1.0}), 2000 + k, 1.0));
      } else {
        CylinderGrid g(4, 161, SectionGrid::torus(16));
        out.emplace_back(&four(), make_perturbed(make_constant(g, Point{1.0, 0.0}), 2000 + k, 1.0));
      }
    }
    return out;
  }();
  return f;
}

Curve average_curve(const CylinderField& u) {
  std::vector<double> s;
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    const Point m = u.slice(i).mean();
    s.insert(s.end(), m.begin(), m.end());
  }
  return Curve(-u.grid.L, u.grid.L, u.dimension, s);
}

std::vector<std::size_t> quartiles(std::size_t nodes) {
  const std::size_t last = nodes - 1;
  return {0, last / 4, last / 2, 3 * last / 4, last};
}

Box covering_box(const std::vector<Well>& wells, const Curve& c) {
  Box b = default_oracle_box(wells, 1.5);
  for (std::size_t k = 0; k < c.nodes(); ++k) {
    for (std::size_t i = 0; i < c.dimension(); ++i) {
      b.lo[i] = std::min(b.lo[i], c.node(k)[i]);
      b.hi[i] = std::max(b.hi[i], c.node(k)[i]);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

Outcome c1_heteroclinic_anchor() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto res = minimize_heteroclinic(gl(), Point{-1.0}, Point{1.0}, 10, 2000);
  const double secs = seconds_since(t0);

  const double quad = simpson_2sqrtW(-1, 1, 20000);
  // tanh(t / sqrt 2) solves u' = sqrt(W(u)), the equipartition ODE.
  double ode = 0.0;
  for (double t = -6; t <= 6; t += 0.01) {
    const double h = 1e-5;
    const double du = (std::tanh((t + h) / std::sqrt(2.0)) - std::tanh((t - h) / std::sqrt(2.0))) / (2 * h);
    const double u = std::tanh(t / std::sqrt(2.0));
    ode = std::max(ode, std::abs(du - std::sqrt(0.5 * (1 - u * u) * (1 - u * u))));
  }
  double t_zero = 0.0;
  const Curve& c = res.curve;
  for (std::size_t k = 0; k + 1 < c.nodes(); ++k) {
    const double a = c.node(k)[0], b = c.node(k + 1)[0];
    if (a <= 0 && b > 0) {
      t_zero = c.t(k) + c.step() * a / (a - b);
      break;
    }
  }
  double sup = 0.0;
  for (std::size_t k = 0; k < c.nodes(); ++k) {
    sup = std::max(sup, std::abs(c.node(k)[0] - std::tanh((c.t(k) - t_zero) / std::sqrt(2.0))));
  }
  o.check(std::abs(quad - kGL) < 1e-10, "quadrature " + fmt(quad));
  o.check(ode < 1e-6, "ODE substitution residual " + fmt(ode));
  o.check(std::abs(res.energy.total - kGL) <= 1e-3, "|E - 4sqrt2/3| = " + fmt(std::abs(res.energy.total - kGL)));
  o.check(sup <= 1e-3, "profile sup-distance " + fmt(sup));
  o.check(secs < 5.0, "runtime " + fmt(secs) + " s");
  return o;
}

Outcome c2_geodesic_sandwich() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto grid = geod_grid_oracle(gl(), Point{-1.0}, Point{1.0}, default_oracle_box(gl_wells()), 4000);
  const auto up = geod_upper(gl(), Point{-1.0}, Point{1.0});
  o.check(std::abs(grid.value - kGL) <= 5e-3, "GL grid err " + fmt(std::abs(grid.value - kGL)));
  o.check(std::abs(up.value - kGL) <= 5e-3, "GL upper err " + fmt(std::abs(up.value - kGL)));
  const Point x{-1.0, 0.0}, y{1.0, 0.0};
  const auto up4 = best_geod(four(), x, y, nullptr);
  const auto grid4 = geod_grid_oracle(four(), x, y, default_oracle_box(four_wells()), 400);
  const double gap = std::abs(up4.value - grid4.value);
  o.check(gap <= 2e-2, "four-well upper " + fmt(up4.value) + " grid " + fmt(grid4.value) + " gap " + fmt(gap));
  const double secs = seconds_since(t0);
  o.check(secs < 30.0, "runtime " + fmt(secs) + " s");
  return o;
}

Outcome c3_energy_geodesic() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::normal_distribution<double> G;
  const GridGraph graph4(four(), Box::cube(2, -2.5, 2.5), 400);
  const GridGraph graph1(gl(), Box::cube(1, -2.5, 2.5), 4000);
  double worst = kInfinity;
  int count = 0;
  auto test = [&](const Curve& c, const PotentialSpec& W, const GridGraph& g) {
    const Point x(c.node(0).begin(), c.node(0).end());
    const Point y(c.node(c.segments()).begin(), c.node(c.segments()).end());
    const double m = verify_energy_geodesic_bound(c, W, best_geod(W, x, y, &g));
    worst = std::min(worst, m);
    ++count;
  };
  for (int k = 0; k < 50; ++k) {
    const bool vec = k % 2 == 1;
    const std::size_t n = vec ? 2 : 1;
    const std::size_t M = 200;
    Point x(n), y(n);
    for (auto& v : x) v = U(rng);
    for (auto& v : y) v = U(rng);
    std::vector<double> coef(3 * n);
    for (auto& c : coef) c = 0.5 * G(rng);
    const double T = 1.0 + 4.0 * (U(rng) + 2.0) / 4.0;
    std::vector<double> s;
    for (std::size_t j = 0; j <= M; ++j) {
      const double r = static_cast<double>(j) / M;
      for (std::size_t i = 0; i < n; ++i) {
        double v = (1 - r) * x[i] + r * y[i];
        for (int m = 0; m < 3; ++m) v += coef[3 * i + m] * std::sin((m + 1) * M_PI * r);
        s.push_back(std::clamp(v, -2.4, 2.4));
      }
    }
    test(Curve(-T, T, n, s), vec ? four() : gl(), vec ? graph4 : graph1);
  }
  test(minimize_heteroclinic(gl(), Point{-1.0}, Point{1.0}, 10, 2000).curve, gl(), graph1);
  test(minimize_heteroclinic(four(), Point{-1, 0}, Point{0, -1}, 10, 2000).curve, four(), graph4);
  test(minimize_heteroclinic(four(), Point{0, -1}, Point{0, 1}, 10, 2000).curve, four(), graph4);
  o.check(worst >= -5e-3, std::to_string(count) + " curves, min margin " + fmt(worst));
  return o;
}

Outcome c4_total_variation() {
  Outcome o;
  const double slack = 4 * 5e-3;
  auto tv = [&](const Curve& c, const PotentialSpec& W, const std::vector<Well>& wells) {
    OracleOptions oo;
    oo.box = covering_box(wells, c);
    oo.resolution = 400;
    return total_variation_geod(c, W, quartiles(c.nodes()), oo);
  };
  {
    const auto h = minimize_heteroclinic(gl(), Point{-1.0}, Point{1.0}, 10, 2000);
    const double s = tv(h.curve, gl(), gl_wells());
    o.check(s <= h.energy.total + slack, "GL curve: sum " + fmt(s) + " vs E " + fmt(h.energy.total));
  }
  {
    const auto h = minimize_heteroclinic(four(), Point{-1, 0}, Point{0, -1}, 10, 2000);
    const double s = tv(h.curve, four(), four_wells());
    o.check(s <= h.energy.total + slack, "four-well curve: sum " + fmt(s) + " vs E " + fmt(h.energy.total));
  }
  for (const auto* c : {&scalar(), &four_adjacent()}) {
    const auto& u = *c->relaxed;
    const auto& W = u.dimension == 1 ? gl() : four();
    const auto& wells = u.dimension == 1 ? gl_wells() : four_wells();
    const bool ok_run = c->report.residual <= 1e-5;
    const double s = tv(average_curve(u), W, wells);
    const double E = cylinder_energy(u, W);
    o.check(ok_run && s <= E + slack, std::string(u.dimension == 1 ? "GL" : "four-well") +
                                          " cylinder: sum " + fmt(s) + " vs E " + fmt(E));
  }
  return o;
}

Outcome c5_pseudo_distance() {
  Outcome o;
  std::mt19937_64 rng(5);
  const Box box = Box::cube(2, -2, 2);
  const GridGraph g(four(), box, 200);
  std::uniform_real_distribution<double> U(-1.9, 1.9);
  auto pt = [&] { return Point{U(rng), U(rng)}; };
  bool sym = true, ident = true;
  double tri = -kInfinity;
  for (int k = 0; k < 100; ++k) {
    const Point x = pt(), y = pt(), z = pt();
    const double xy = geod_grid_oracle(g, four(), x, y).value;
    const double yz = geod_grid_oracle(g, four(), y, z).value;
    const double xz = geod_grid_oracle(g, four(), x, z).value;
    sym = sym && geod_grid_oracle(g, four(), y, x).value == xy && geod_grid_oracle(g, four(), z, y).value == yz;
    ident = ident && geod_grid_oracle(g, four(), x, x).value == 0.0;
    tri = std::max(tri, xz - xy - yz);
  }
  o.check(sym, "symmetry exact");
  o.check(ident, "identity exact");
  o.check(tri <= 1e-12, "triangle: max d(x,z) - d(x,y) - d(y,z) = " + fmt(tri));

  const double delta = 0.5;
  const auto nb = nondegeneracy_bound(four(), four_wells(), delta, box, 200);
  double worst = kInfinity;
  int pairs = 0;
  while (pairs < 50) {
    const Point x = pt(), y = pt();
    if (distance(x, y) < delta) continue;
    ++pairs;
    worst = std::min(worst, geod_grid_oracle(g, four(), x, y).value - nb.bound);
  }
  o.check(nb.c_delta > 0 && worst >= -1e-6,
          "non-degeneracy: c_delta " + fmt(nb.c_delta) + ", min geod - bound " + fmt(worst));
  return o;
}

Outcome c6_averaged_potential() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto grid = SectionGrid::interval(65);
  double worst = -kInfinity;
  for (int k = 0; k <= 20; ++k) {
    const Point z{-2.0 + 0.2 * k};
    worst = std::max(worst, averaged_potential(gl(), z, grid).value - gl().value(z));
  }
  o.check(worst <= 1e-9, "max V - W on 21 points " + fmt(worst));
  double at_wells = 0.0;
  for (const auto& w : gl_wells()) at_wells = std::max(at_wells, averaged_potential(gl(), w.location, grid).value);
  o.check(at_wells <= 1e-6, "V at wells " + fmt(at_wells));
  const double v0 = averaged_potential(gl(), Point{0.0}, grid).value;
  o.check(v0 > 1e-3, "V(0) = " + fmt(v0));

  const auto& fields = jensen_fields();
  double lo = kInfinity, hi = -kInfinity;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < f.grid.M1; ++i) {
      const double m = f.slice(i).mean()[0];
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  const auto table = VTable::build(gl(), fields.front().grid.section, Box{{lo - 0.05}, {hi + 0.05}}, 32);
  double jensen = kInfinity;
  for (const auto& f : fields) jensen = std::min(jensen, jensen_check(f, gl(), table, -f.grid.L, f.grid.L));
  o.check(jensen >= -5e-3, std::to_string(fields.size()) + " fields, min Jensen margin " + fmt(jensen));
  const double secs = seconds_since(t0);
  o.check(secs < 60.0, "runtime " + fmt(secs) + " s");
  return o;
}

std::vector<std::pair<const PotentialSpec*, const CylinderField*>> all_fields() {
  std::vector<std::pair<const PotentialSpec*, const CylinderField*>> out;
  for (const auto& f : jensen_fields()) out.emplace_back(&gl(), &f);
  for (const auto& [W, f] : random_fields()) out.emplace_back(W, &f);
  for (const auto* c : {&scalar(), &scalar_long()}) {
    out.emplace_back(&gl(), &*c->initial);
    out.emplace_back(&gl(), &*c->relaxed);
  }
  for (const auto* c : {&slice_run(), &four_adjacent()}) {
    out.emplace_back(&four(), &*c->initial);
    out.emplace_back(&four(), &*c->relaxed);
  }
  return out;
}

Outcome c7_slice_decomposition() {
  Outcome o;
  double worst = 0.0;
  const auto fields = all_fields();
  for (const auto& [W, f] : fields) {
    const double E = cylinder_energy(*f, *W);
    worst = std::max(worst, std::abs(E - slice_decomposition_energy(*f, *W)) / std::abs(E));
  }
  o.check(worst <= 1e-9, std::to_string(fields.size()) + " fields, max relative gap " + fmt(worst));
  return o;
}

Outcome c8_holder() {
  Outcome o;
  double worst = -kInfinity;
  const auto fields = all_fields();
  std::uint64_t seed = 0;
  for (const auto& [W, f] : fields) {
    worst = std::max(worst, holder_check(*f, 200, seed++) - (1.0 + 5.0 * f->grid.h1()));
  }
  o.check(worst <= 0.0, std::to_string(fields.size()) + " fields (20 random), max ratio - (1 + 5 h1) = " + fmt(worst));
  return o;
}

Outcome c9_scalar_run() {
  Outcome o;
  const auto& c = scalar();
  const auto& w = gl_wells();
  o.check(c.report.converged && c.report.residual <= 1e-5,
          "residual " + fmt(c.report.residual) + " after " + std::to_string(c.report.steps) + " steps");
  const bool ends = w[c.trace.well_minus].location[0] < -0.5 && w[c.trace.well_plus].location[0] > 0.5;
  o.check(c.trace.pass && ends, "traces -1 / +1, L2 " + fmt(std::max(c.trace.max_dist_minus, c.trace.max_dist_plus)));
  const auto& r = scalar_long();
  const double shift = std::abs(r.report.final_energy - c.report.final_energy);
  const double trace_shift = std::max(std::abs(r.trace.max_dist_minus - c.trace.max_dist_minus),
                                      std::abs(r.trace.max_dist_plus - c.trace.max_dist_plus));
  o.check(r.trace.pass && shift <= 2e-3 && trace_shift <= 2e-3,
          "L = 15 energy shift " + fmt(shift) + ", trace shift " + fmt(trace_shift));
  o.check(c.seconds < 60.0, "runtime " + fmt(c.seconds) + " s");
  return o;
}

const std::vector<KEpsResult>& slice_ladder() {
  static const auto k = k_epsilon_ladder(four(), SectionGrid::torus(64), {0.4, 0.2, 0.1, 0.05},
                                         four_wells(), KEpsFlavor::mean_constrained_a, 0.0);
  return k;
}

double first_average_spread(const CylinderField& u, double a) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.grid.M1; ++i) m = std::max(m, std::abs(u.slice(i).mean()[0] - a));
  return m;
}

Outcome c10_slice_run() {
  Outcome o;
  const auto& c = slice_run();
  const double before = first_average_spread(*c.initial, 0.0);
  const double after = first_average_spread(*c.relaxed, 0.0);
  o.check(before <= 1e-10, "initial max |avg u1 - a| " + fmt(before));
  o.check(c.report.converged, "relaxed, residual " + fmt(c.report.residual));
  o.check(after <= 1e-6, "relaxed max |avg u1 - a| " + fmt(after));
  o.check(c.trace.pass, "traces on the slice z1 = 0, L2 " +
                            fmt(std::max(c.trace.max_dist_minus, c.trace.max_dist_plus)));
  bool ladder = true;
  std::string values;
  for (const auto& k : slice_ladder()) {
    ladder = ladder && k.value > 1e-6 && k.active;
    values += (values.empty() ? "" : ",") + fmt(k.value);
  }
  o.check(ladder, "k^a_eps = " + values);
  return o;
}

Outcome c11_monotonicity() {
  Outcome o;
  const auto ladder = k_epsilon_ladder(gl(), SectionGrid::interval(65), {0.4, 0.2, 0.1, 0.05},
                                       gl_wells(), KEpsFlavor::plain, std::nullopt);
  bool mono = true;
  for (std::size_t k = 1; k < ladder.size(); ++k) mono = mono && ladder[k].value <= ladder[k - 1].value;
  const auto& l2 = slice_ladder();
  for (std::size_t k = 1; k < l2.size(); ++k) mono = mono && l2[k].value <= l2[k - 1].value;
  o.check(mono, "k_eps non-increasing as eps decreases");

  double prev = kInfinity;
  bool grid_mono = true;
  std::string values;
  for (int res : {100, 200, 400, 800}) {
    const double g = geod_grid_oracle(four(), Point{-1, 0}, Point{1, 0}, Box::cube(2, -2, 2), res).value;
    grid_mono = grid_mono && g <= prev;
    prev = g;
    values += (values.empty() ? "" : ",") + fmt(g);
  }
  o.check(grid_mono, "grid oracle under doubling " + values);

  auto cosine_error = [](int P) {
    const auto g = SectionGrid::interval(P);
    std::vector<double> v;
    for (std::size_t j = 0; j < g.node_count(); ++j) v.push_back(std::cos(M_PI * g.coordinates(j)[0]));
    const SectionField f(g, 1, v);
    return std::abs(section_energy_parts(f, PotentialSpec::quadratic(1)).gradient - M_PI * M_PI / 2);
  };
  const double ratio = cosine_error(33) / cosine_error(65);
  o.check(ratio >= 3.5 && ratio <= 4.5, "section gradient error ratio " + fmt(ratio));
  return o;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

Outcome c12_reproducibility() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("multiwell_acceptance_" + std::to_string(::getpid()));
  std::vector<RunOutcome> runs;
  for (const char* tag : {"a", "b"}) {
    RunConfig cfg;
    cfg.command = Command::verify_all;
    cfg.seed = 1234;
    cfg.out = (root / tag).string();
    runs.push_back(run(cfg));
  }
  o.check(runs[0].status == kExitPass && runs[1].status == kExitPass, "both runs pass");
  std::size_t csv = 0;
  bool same = true;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    const auto name = e.path().filename();
    if (name == "manifest.json") continue;
    const fs::path other = root / "b" / name;
    same = same && fs::exists(other) && slurp(e.path()) == slurp(other);
    if (name.extension() == ".csv") ++csv;
  }
  o.check(same && csv > 0, std::to_string(csv) + " CSV files byte-identical");
  bool digests = runs[0].manifest["files"] == runs[1].manifest["files"];
  for (const auto& f : runs[0].manifest["files"]) {
    digests = digests && sha256_hex(slurp(root / "a" / f["file"].get<std::string>())) == f["sha256"];
  }
  o.check(digests, "manifest digests match");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"heteroclinic anchor", c1_heteroclinic_anchor},
      {"geodesic sandwich", c2_geodesic_sandwich},
      {"energy >= geodesic", c3_energy_geodesic},
      {"total-variation bound", c4_total_variation},
      {"pseudo-distance axioms", c5_pseudo_distance},
      {"averaged potential", c6_averaged_potential},
      {"slice decomposition", c7_slice_decomposition},
      {"Holder bound", c8_holder},
      {"scalar cylinder run", c9_scalar_run},
      {"vector cylinder run on a slice", c10_slice_run},
      {"monotonicity", c11_monotonicity},
      {"reproducibility", c12_reproducibility},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = Clock::now();
    Outcome r;
    try {
      r = criteria[k].second();
    } catch (const std::exception& e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    if (!r.pass) ++failed;
    std::printf("[%s] C%02zu %s: %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), r.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
