#include "multiwell/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "multiwell/cross_section.hpp"
#include "multiwell/curve.hpp"
#include "multiwell/cylinder.hpp"
#include "multiwell/geodesic.hpp"
#include "multiwell/io.hpp"
#include "multiwell/potential.hpp"
#include "multiwell/version.hpp"

namespace multiwell {

using nlohmann::json;

std::uint64_t stage_seed(std::uint64_t root, std::uint64_t stage) {
  // splitmix64 finalizer of root + stage * golden gamma.
  std::uint64_t z = root + (stage + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

enum Stage : std::uint64_t {
  kHeteroclinic = 1,
  kGeodesic,
  kAvgpot,
  kKeps,
  kCylinder,
  kJensen,
  kHolder,
};

struct Context {
  const RunConfig& cfg;
  PotentialSpec spec;
  OutputDir& out;
  std::vector<Well> wells;
  std::map<std::string, Verdict> verdicts;
  json results = json::object();
};

// Margins are signed slack to the threshold: negative exactly when the
// numeric part of the check fails.
void verdict(Context& ctx, const std::string& name, bool pass, double margin,
             const std::string& detail) {
  ctx.verdicts[name] = Verdict{pass, margin, detail};
}

void verdict_le(Context& ctx, const std::string& name, double value, double limit,
                const std::string& what) {
  verdict(ctx, name, value <= limit, limit - value,
          what + " = " + format_double(value) + ", must be <= " + format_double(limit));
}

void verdict_ge(Context& ctx, const std::string& name, double value, double limit,
                const std::string& what) {
  verdict(ctx, name, value >= limit, value - limit,
          what + " = " + format_double(value) + ", must be >= " + format_double(limit));
}

json verdict_json(const Verdict& v) {
  return {{"pass", v.pass}, {"margin", v.margin}, {"detail", v.detail}};
}

std::vector<Well> locate_wells(const PotentialSpec& spec) {
  const std::size_t n = spec.dimension();
  const int res = n == 1 ? 601 : n == 2 ? 121 : 31;
  const Box box = spec.box_mask() ? *spec.box_mask() : Box::cube(n, -3.0, 3.0);
  auto wells = find_wells(spec, box, res);
  if (wells.empty()) throw NumericalError("no wells found");
  return wells;
}

SectionGrid section_for(const RunConfig& cfg, std::size_t n) {
  const std::string kind = cfg.section == "auto" ? (n == 1 ? "interval_neumann" : "torus") : cfg.section;
  if (kind == "interval_neumann") return SectionGrid::interval(cfg.P == 0 ? 65 : cfg.P);
  return SectionGrid::torus(cfg.P == 0 ? 64 : cfg.P, cfg.axes);
}

std::pair<Point, Point> endpoints(const Context& ctx) {
  const Point x = ctx.cfg.from ? *ctx.cfg.from : ctx.wells.front().location;
  const Point y = ctx.cfg.to ? *ctx.cfg.to : ctx.wells.back().location;
  if (x.size() != ctx.spec.dimension() || y.size() != ctx.spec.dimension()) {
    throw ConfigError("from/to must have the potential's dimension");
  }
  return {x, y};
}

// from/to when given, else the first well and the well nearest to it.
std::pair<Point, Point> cylinder_endpoints(const Context& ctx) {
  if (ctx.cfg.from || ctx.cfg.to) return endpoints(ctx);
  const Point& x = ctx.wells.front().location;
  const Point* y = &ctx.wells.back().location;
  for (std::size_t k = 1; k < ctx.wells.size(); ++k) {
    if (distance(ctx.wells[k].location, x) < distance(*y, x)) y = &ctx.wells[k].location;
  }
  return {x, *y};
}

// int_x^y 2 sqrt(W) on the line (N = 1), composite Simpson.
double line_integral_1d(const PotentialSpec& spec, double x, double y) {
  constexpr int n = 20000;
  const double h = (y - x) / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double z = x + h * k;
    const double f = 2.0 * std::sqrt(spec.value(std::span<const double>(&z, 1)));
    s += f * (k == 0 || k == n ? 1.0 : (k % 2 ? 4.0 : 2.0));
  }
  return std::abs(s * h / 3.0);
}

Box cover(Box box, const std::vector<Point>& pts, double pad) {
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      box.lo[i] = std::min(box.lo[i], p[i] - pad);
      box.hi[i] = std::max(box.hi[i], p[i] + pad);
    }
  }
  return box;
}

void do_wells(Context& ctx) {
  const std::size_t n = ctx.spec.dimension();
  json j = {{"potential", potential_to_json(ctx.spec)}, {"wells", wells_to_json(ctx.wells)}};
  double radius = 0.0;
  for (const auto& w : ctx.wells) radius = std::max(radius, norm(w.location));
  if (ctx.spec.finite_valued()) {
    const auto rep = check_hypotheses(ctx.spec, Box::cube(n, -3.0, 3.0), radius + 2.0);
    j["hypotheses"] = {{"h1_well_count", rep.h1_well_count},
                       {"h2_infimum_at_radius", rep.h2_infimum_at_radius},
                       {"h2_holds", rep.h2_holds},
                       {"r_check", rep.r_check}};
    verdict(ctx, "coercive_at_infinity", rep.h2_holds, rep.h2_infimum_at_radius - 1e-6,
            "min W on the sphere of radius " + format_double(rep.r_check) + " = " +
                format_double(rep.h2_infimum_at_radius) + ", must be > 1e-6");
  }
  ctx.out.write_json("wells.json", j);
  verdict_ge(ctx, "wells_found", static_cast<double>(ctx.wells.size()), 2.0, "number of wells");
}

// The straight segment can be a critical path (a saddle connection), so for
// N >= 2 two bent starts are tried as well and the shortest result is kept.
GeodesicResult best_upper(const Context& ctx, const Point& x, const Point& y) {
  GeodesicOptions gopts;
  gopts.M = ctx.cfg.geod_M;
  gopts.seed = stage_seed(ctx.cfg.seed, kGeodesic);
  std::vector<double> bumps = {ctx.cfg.perturbation};
  if (ctx.spec.dimension() >= 2) {
    bumps.push_back(0.5);
    bumps.push_back(-0.5);
  }
  std::optional<GeodesicResult> best;
  for (double b : bumps) {
    gopts.perturbation = b;
    auto r = geod_upper(ctx.spec, x, y, gopts);
    if (!best || r.value < best->value) best = std::move(r);
  }
  return std::move(*best);
}

void do_heteroclinic(Context& ctx) {
  const auto [x, y] = endpoints(ctx);
  HeteroclinicOptions opts;
  opts.descent.tol = ctx.cfg.het_tol;
  opts.perturbation = ctx.cfg.perturbation;
  opts.seed = stage_seed(ctx.cfg.seed, kHeteroclinic);
  const auto res = minimize_heteroclinic(ctx.spec, x, y, ctx.cfg.T, ctx.cfg.M, opts);
  ctx.out.write("heteroclinic.csv", curve_csv(res.curve));

  const auto upper = best_upper(ctx, x, y);
  const double margin = verify_energy_geodesic_bound(res.curve, ctx.spec, upper);
  json j = {{"from", x},
            {"to", y},
            {"T", ctx.cfg.T},
            {"M", ctx.cfg.M},
            {"energy", {{"kinetic", res.energy.kinetic},
                        {"potential", res.energy.potential},
                        {"total", res.energy.total},
                        {"geodesic_length", res.energy.geodesic_length},
                        {"equipartition_defect", res.energy.equipartition_defect}}},
            {"iterations", res.descent.iterations},
            {"converged", !res.not_converged},
            {"el_residual", res.el_residual},
            {"geod_upper", upper.value},
            {"energy_minus_geod", margin}};
  verdict(ctx, "heteroclinic_converged", !res.not_converged, ctx.cfg.het_tol - res.descent.grad_max,
          "gradient norm at exit = " + format_double(res.descent.grad_max) + ", must be <= " +
              format_double(ctx.cfg.het_tol));
  verdict_ge(ctx, "heteroclinic_energy_geodesic_bound", margin, -5e-3, "E_W - geod");
  if (ctx.spec.dimension() == 1) {
    const double q = line_integral_1d(ctx.spec, x[0], y[0]);
    const double err = std::abs(res.energy.total - q);
    j["quadrature"] = q;
    verdict_le(ctx, "heteroclinic_quadrature", err, 1e-3, "|E_W - int 2 sqrt(W)|");
  }
  ctx.results["heteroclinic"] = j;
  ctx.out.write_json("heteroclinic.json", j);
}

void do_geodesic(Context& ctx) {
  const auto [x, y] = endpoints(ctx);
  const auto upper = best_upper(ctx, x, y);
  const Box box = cover(default_oracle_box(ctx.wells, ctx.cfg.box_scale), {x, y}, 0.0);
  const auto grid = geod_grid_oracle(ctx.spec, x, y, box, ctx.cfg.resolution, ctx.cfg.stencil_radius);
  if (upper.witness) ctx.out.write("geodesic_upper.csv", curve_csv(*upper.witness));
  if (grid.witness) ctx.out.write("geodesic_grid.csv", curve_csv(*grid.witness));
  const double gap = std::abs(upper.value - grid.value);
  json j = {{"from", x},
            {"to", y},
            {"upper", upper.value},
            {"upper_converged", upper.converged},
            {"upper_iterations", upper.iterations},
            {"grid", grid.value},
            {"grid_resolution", ctx.cfg.resolution},
            {"stencil_radius", ctx.cfg.stencil_radius},
            {"box", {{"lo", box.lo}, {"hi", box.hi}}}};
  verdict_le(ctx, "geodesic_sandwich", gap, 2e-2, "|upper - grid|");
  if (ctx.spec.dimension() == 1) {
    const double q = line_integral_1d(ctx.spec, x[0], y[0]);
    const double err = std::max(std::abs(upper.value - q), std::abs(grid.value - q));
    j["quadrature"] = q;
    verdict_le(ctx, "geodesic_quadrature", err, 5e-3, "max |estimate - int 2 sqrt(W)|");
  }
  ctx.results["geodesic"] = j;
  ctx.out.write_json("geodesic.json", j);
}

void do_avgpot(Context& ctx) {
  const std::size_t n = ctx.spec.dimension();
  const SectionGrid grid = section_for(ctx.cfg, n);
  std::vector<Point> samples;
  const int m = ctx.cfg.z_count;
  std::vector<int> idx(n, 0);
  for (;;) {
    Point z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = -ctx.cfg.z_max + 2.0 * ctx.cfg.z_max * idx[i] / (m - 1);
    samples.push_back(z);
    std::size_t i = 0;
    while (i < n && ++idx[i] == m) idx[i++] = 0;
    if (i == n) break;
  }
  VPropsOptions opts;
  opts.averaged.n_restarts = ctx.cfg.restarts;
  opts.averaged.seed = stage_seed(ctx.cfg.seed, kAvgpot);
  double radius = 0.0;
  for (const auto& w : ctx.wells) radius = std::max(radius, norm(w.location));
  opts.r_check = radius + 2.0;
  const auto rep = verify_V_props(ctx.spec, ctx.wells, samples, grid, opts);

  std::string csv;
  for (std::size_t i = 0; i < n; ++i) csv += "z" + std::to_string(i + 1) + ",";
  csv += "V,W,upper_bound_ok,zero_set_ok\n";
  double worst_upper = -kInfinity;
  for (const auto& r : rep.rows) {
    for (double v : r.z) csv += format_double(v) + ",";
    csv += format_double(r.V) + "," + format_double(r.W) + "," + (r.upper_bound_ok ? "1" : "0") +
           "," + (r.zero_set_ok ? "1" : "0") + "\n";
    worst_upper = std::max(worst_upper, r.V - r.W);
  }
  ctx.out.write("avgpot.csv", csv);
  json j = {{"section", to_string(grid.kind())},
            {"points", grid.points_per_axis()},
            {"upper_bound_holds", rep.upper_bound_holds},
            {"zero_set_equality_holds", rep.zero_set_equality_holds},
            {"v_infinity_proxy", rep.v_infinity_proxy},
            {"r_check", rep.r_check},
            {"lsc_checked", rep.lsc_checked}};
  ctx.results["avgpot"] = j;
  ctx.out.write_json("avgpot.json", j);
  verdict(ctx, "V_upper_bound", rep.upper_bound_holds, 1e-9 - worst_upper,
          "max V - W = " + format_double(worst_upper) + ", must be <= 1e-9");
  verdict(ctx, "V_zero_set", rep.zero_set_equality_holds, 0.0,
          "V <= 1e-6 exactly where W <= 1e-6");
  verdict(ctx, "V_positive_far_out", rep.v_infinity_positive, rep.v_infinity_proxy - 1e-6,
          "min V on the sphere of radius " + format_double(rep.r_check) + " = " +
              format_double(rep.v_infinity_proxy) + ", must be > 1e-6");
}

void do_keps(Context& ctx) {
  const std::size_t n = ctx.spec.dimension();
  const SectionGrid grid = section_for(ctx.cfg, n);
  const KEpsFlavor flavor = ctx.cfg.a ? KEpsFlavor::mean_constrained_a : KEpsFlavor::plain;
  if (ctx.cfg.a && (grid.kind() != SectionKind::torus || static_cast<std::size_t>(grid.axes()) + 1 != n)) {
    throw ConfigError("keps with a needs the torus section with axes + 1 = N");
  }
  KEpsOptions opts;
  opts.seed = stage_seed(ctx.cfg.seed, kKeps);
  const auto res = k_epsilon_ladder(ctx.spec, grid, ctx.cfg.eps, ctx.wells, flavor, ctx.cfg.a, opts);
  std::string csv = "eps,k_eps,distance,active\n";
  bool positive = true;
  double min_value = kInfinity;
  for (const auto& r : res) {
    csv += format_double(r.epsilon) + "," + format_double(r.value) + "," +
           format_double(r.constrained_distance) + "," + (r.active ? "1" : "0") + "\n";
    positive = positive && r.value > 1e-6 && r.active;
    min_value = std::min(min_value, r.value);
  }
  // Order by eps to test monotonicity whatever the input order.
  std::vector<std::pair<double, double>> by_eps;
  for (const auto& r : res) by_eps.emplace_back(r.epsilon, r.value);
  std::sort(by_eps.begin(), by_eps.end());
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < by_eps.size(); ++i) {
    worst = std::max(worst, by_eps[i].second - by_eps[i + 1].second);
  }
  ctx.out.write("keps.csv", csv);
  json j = {{"flavor", to_string(flavor)}, {"section", to_string(grid.kind())}};
  if (ctx.cfg.a) j["a"] = *ctx.cfg.a;
  ctx.results["keps"] = j;
  verdict(ctx, "keps_positive", positive, min_value - 1e-6,
          "min k_eps = " + format_double(min_value) + ", every k_eps must be > 1e-6 with active constraint");
  verdict_le(ctx, "keps_monotone", worst, 1e-12, "max increase of k_eps as eps shrinks");
}

struct CylinderRun {
  CylinderField initial;
  CylinderField relaxed;
  RunReport report;
  std::vector<SliceDiagnostics> slices;
  TraceVerdict trace;
};

CylinderRun cylinder_run(Context& ctx, double L, std::size_t M1) {
  const RunConfig& cfg = ctx.cfg;
  const std::size_t n = ctx.spec.dimension();
  Point wm, wp;
  if (cfg.a) {
    const auto on = wells_on_slice(ctx.wells, *cfg.a);
    if (on.size() < 2) throw ConfigError("fewer than two wells on the slice z_1 = a");
    wm = on.front();
    wp = on.back();
  } else {
    std::tie(wm, wp) = cylinder_endpoints(ctx);
  }
  const EndCondition end = end_condition_from_string(cfg.end);
  CylinderGrid grid(L, M1, section_for(cfg, n), end, end == EndCondition::clamped_to_wells ? wm : Point{},
                    end == EndCondition::clamped_to_wells ? wp : Point{});
  const std::uint64_t seed = stage_seed(cfg.seed, kCylinder);
  const std::size_t M = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(cfg.M * L / cfg.L)));
  auto heteroclinic = [&](double perturbation, std::uint64_t s) {
    HeteroclinicOptions opts;
    opts.descent.tol = cfg.het_tol;
    opts.perturbation = perturbation;
    opts.seed = s;
    return minimize_heteroclinic(ctx.spec, wm, wp, L, M, opts).curve;
  };
  const InitialKind kind = initial_kind_from_string(cfg.initial);
  InitialParams params;
  params.seed = seed;
  params.amplitude = cfg.amplitude;
  params.width = cfg.width;
  params.well = wm;
  std::optional<CylinderField> u0;
  switch (kind) {
    case InitialKind::constant_well:
      u0 = make_initial(kind, grid, n, params);
      break;
    case InitialKind::heteroclinic_extension:
    case InitialKind::perturbed:
      u0 = make_heteroclinic_extension(grid, heteroclinic(cfg.perturbation, seed));
      if (cfg.amplitude > 0.0) u0 = make_perturbed(*u0, seed, cfg.amplitude);
      break;
    case InitialKind::two_connection_interp: {
      if (n < 2) throw ConfigError("two_connection_interp needs N >= 2");
      const double p = std::max(cfg.perturbation, 0.5);
      params.curve = heteroclinic(p, seed);
      params.curve2 = heteroclinic(-p, seed);
      u0 = make_initial(kind, grid, n, params);
      break;
    }
    case InitialKind::divfree_harmonic:
      params.base = make_heteroclinic_extension(grid, heteroclinic(cfg.perturbation, seed));
      u0 = make_initial(kind, grid, n, params);
      break;
  }
  RelaxOptions ro;
  ro.dt = cfg.dt;
  ro.max_steps = cfg.max_steps;
  ro.residual_tol = cfg.residual_tol;
  RunReport rep;
  rep.seed = cfg.seed;
  CylinderField u = relax(*u0, ctx.spec, ro, rep);
  auto slices = slice_diagnostics(u, ctx.spec, ctx.wells, cfg.a);
  TraceOptions to;
  to.trace_tol = cfg.trace_tol;
  to.a = cfg.a;
  auto trace = trace_convergence_verdict(slices, ctx.wells, to);
  return {std::move(*u0), std::move(u), std::move(rep), std::move(slices), std::move(trace)};
}

json trace_json(const TraceVerdict& t, const std::vector<Well>& wells) {
  return {{"pass", t.pass},
          {"u_minus", wells[t.well_minus].location},
          {"u_plus", wells[t.well_plus].location},
          {"max_dist_minus", t.max_dist_minus},
          {"max_dist_plus", t.max_dist_plus},
          {"max_sup_dist_minus", t.max_sup_dist_minus},
          {"max_sup_dist_plus", t.max_sup_dist_plus},
          {"max_average_dev_minus", t.max_average_dev_minus},
          {"max_average_dev_plus", t.max_average_dev_plus},
          {"max_a_dev", t.max_a_dev},
          {"failures", t.failures}};
}

std::optional<CylinderRun> do_cylinder(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  CylinderRun r = cylinder_run(ctx, cfg.L, cfg.M1);
  const auto& u = r.relaxed;
  const double h1 = u.grid.h1();

  const auto& hist = r.report.energy_history;
  double worst_rise = -kInfinity;
  for (std::size_t i = 1; i < hist.size(); ++i) worst_rise = std::max(worst_rise, hist[i] - hist[i - 1]);
  if (hist.size() < 2) worst_rise = 0.0;
  const double E = cylinder_energy(u, ctx.spec);
  const double decomposition = std::abs(E - slice_decomposition_energy(u, ctx.spec)) / std::max(1.0, std::abs(E));
  const double holder = holder_check(u, cfg.holder_pairs, stage_seed(cfg.seed, kHolder));

  verdict_le(ctx, "relax_converged", r.report.residual, cfg.residual_tol, "stationarity residual");
  verdict_le(ctx, "energy_monotone", worst_rise, 1e-12 * (1.0 + std::abs(hist.front())),
             "largest energy increase over accepted steps");
  const double trace_dist = std::max(r.trace.max_dist_minus, r.trace.max_dist_plus);
  verdict(ctx, "trace_convergence", r.trace.pass, cfg.trace_tol - trace_dist,
          r.trace.failures.empty()
              ? "outer slices within trace_tol of u-/u+, max L2 distance " + format_double(trace_dist)
              : r.trace.failures.front());
  verdict_le(ctx, "slice_decomposition", decomposition, 1e-9, "relative gap to the slice integral");
  verdict_le(ctx, "holder", holder, 1.0 + 5.0 * h1, "worst ratio (limit 1 + 5 h1)");

  json j = {{"energy", E},
            {"initial_energy", hist.front()},
            {"steps", r.report.steps},
            {"rejected_steps", r.report.rejected_steps},
            {"final_dt", r.report.final_dt},
            {"residual", r.report.residual},
            {"stop_reason", r.report.stop_reason},
            {"trace", trace_json(r.trace, ctx.wells)},
            {"holder_worst_ratio", holder},
            {"slice_decomposition_gap", decomposition}};

  if (cfg.a) {
    auto dev = [&](const CylinderField& f) {
      double d = 0.0;
      for (const auto& s : slice_diagnostics(f, ctx.spec, ctx.wells, cfg.a)) {
        d = std::max(d, std::abs(s.average[0] - *cfg.a));
      }
      return d;
    };
    const double d0 = dev(r.initial);
    verdict_le(ctx, "average_constant_initial", d0, 1e-10, "max |mean u_1 - a| of the initial field");
    double max_div = 0.0;
    bool have_div = false;
    for (const auto& s : r.slices) {
      if (s.div_residual) {
        have_div = true;
        max_div = std::max(max_div, *s.div_residual);
      }
    }
    if (have_div) j["max_div_residual"] = max_div;
  }

  if (cfg.rerun_factor > 0.0) {
    const double L2 = cfg.L * cfg.rerun_factor;
    const auto M1b = static_cast<std::size_t>(std::lround((cfg.M1 - 1) * cfg.rerun_factor)) + 1;
    const CylinderRun r2 = cylinder_run(ctx, L2, M1b);
    const double shift = std::max(std::abs(r2.trace.max_dist_minus - r.trace.max_dist_minus),
                                  std::abs(r2.trace.max_dist_plus - r.trace.max_dist_plus));
    j["rerun"] = {{"L", L2},
                  {"M1", M1b},
                  {"energy", r2.report.final_energy},
                  {"residual", r2.report.residual},
                  {"trace", trace_json(r2.trace, ctx.wells)},
                  {"outer_distance_shift", shift}};
    verdict_le(ctx, "end_sensitivity", shift, 2e-3,
               "outer-slice distance shift at " + format_double(cfg.rerun_factor) + " L");
  }

  std::string energy_csv = "step,energy\n";
  for (std::size_t i = 0; i < hist.size(); ++i) energy_csv += std::to_string(i) + "," + format_double(hist[i]) + "\n";
  ctx.out.write("energy.csv", energy_csv);
  ctx.out.write("field.csv", field_csv(u));
  ctx.out.write_json("field.json", field_sidecar(u, ctx.spec.name(), cfg.seed));
  ctx.out.write("slices.csv", slices_csv(r.slices));
  ctx.results["cylinder"] = j;
  ctx.out.write_json("cylinder.json", j);
  return r;
}

void do_composite_checks(Context& ctx, const CylinderRun& r) {
  const RunConfig& cfg = ctx.cfg;
  const auto& u = r.relaxed;
  const std::size_t n = ctx.spec.dimension();

  // Fields for the Jensen and Hoelder checks: the relaxed one and seeded
  // perturbations of it.
  std::vector<CylinderField> fields = {u};
  for (std::size_t k = 0; k < cfg.jensen_fields; ++k) {
    fields.push_back(make_perturbed(u, stage_seed(cfg.seed, kJensen) + k, 0.3));
  }
  std::vector<Point> means;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < f.grid.M1; ++i) means.push_back(f.slice(i).mean());
  }
  Box box{means.front(), means.front()};
  box = cover(box, means, 0.05);
  AveragedPotentialOptions vopts;
  vopts.n_restarts = cfg.restarts;
  vopts.seed = stage_seed(cfg.seed, kAvgpot);
  const VTable table = VTable::build(ctx.spec, u.grid.section, box, cfg.vtable_resolution, vopts, cfg.jobs);
  double jensen = kInfinity, holder = 0.0;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    jensen = std::min(jensen, jensen_check(fields[k], ctx.spec, table, -u.grid.L, u.grid.L));
    holder = std::max(holder, holder_check(fields[k], cfg.holder_pairs, stage_seed(cfg.seed, kHolder) + k));
  }
  verdict_ge(ctx, "jensen", jensen, -5e-3, "min over " + std::to_string(fields.size()) + " fields");
  verdict_le(ctx, "holder_fields", holder, 1.0 + 5.0 * u.grid.h1(),
             "worst ratio over " + std::to_string(fields.size()) + " fields (limit 1 + 5 h1)");

  // Sum of geodesic distances between quartile slice averages.
  std::vector<double> samples;
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    const Point m = u.slice(i).mean();
    samples.insert(samples.end(), m.begin(), m.end());
  }
  const Curve averages(-u.grid.L, u.grid.L, n, samples);
  const std::size_t last = u.grid.M1 - 1;
  const std::vector<std::size_t> partition = {0, last / 4, last / 2, 3 * last / 4, last};
  std::vector<Point> pts;
  for (std::size_t k : partition) pts.emplace_back(averages.node(k).begin(), averages.node(k).end());
  OracleOptions oracle;
  oracle.box = cover(default_oracle_box(ctx.wells, cfg.box_scale), pts, 0.0);
  oracle.resolution = cfg.resolution;
  oracle.stencil_radius = cfg.stencil_radius;
  const double tv = total_variation_geod(averages, ctx.spec, partition, oracle);
  const double E = cylinder_energy(u, ctx.spec);
  const double margin = E + 4.0 * 5e-3 - tv;
  verdict(ctx, "total_variation", margin >= 0.0, margin,
          "E(u) + 2e-2 - sum geod over the quartile partition, must be >= 0");
  ctx.results["composite"] = {{"jensen_min_margin", jensen},
                              {"holder_worst_ratio", holder},
                              {"vtable_box", {{"lo", box.lo}, {"hi", box.hi}}},
                              {"total_variation_geod", tv},
                              {"energy", E}};
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  json manifest = {{"version", std::string(kVersion)}, {"config", config_to_json(cfg)}};
  std::optional<OutputDir> out;
  std::optional<Context> ctx;
  try {
    out.emplace(cfg.out);
    PotentialSpec spec = load_potential(cfg.potential);
    require_finite_valued(spec);
    manifest["potential"] = potential_to_json(spec);
    ctx.emplace(Context{cfg, spec, *out, {}, {}, json::object()});
    ctx->wells = locate_wells(spec);
    switch (cfg.command) {
      case Command::wells:
        do_wells(*ctx);
        break;
      case Command::heteroclinic:
        do_heteroclinic(*ctx);
        break;
      case Command::geodesic:
        do_geodesic(*ctx);
        break;
      case Command::avgpot:
        do_avgpot(*ctx);
        break;
      case Command::keps:
        do_keps(*ctx);
        break;
      case Command::cylinder:
        do_cylinder(*ctx);
        break;
      case Command::verify_all: {
        do_wells(*ctx);
        do_heteroclinic(*ctx);
        do_geodesic(*ctx);
        do_avgpot(*ctx);
        do_keps(*ctx);
        const auto r = do_cylinder(*ctx);
        do_composite_checks(*ctx, *r);
        break;
      }
    }
    bool all = true;
    json verdicts = json::object();
    for (const auto& [name, v] : ctx->verdicts) {
      verdicts[name] = verdict_json(v);
      all = all && v.pass;
    }
    manifest["verdicts"] = verdicts;
    manifest["results"] = ctx->results;
    outcome.status = all ? kExitPass : kExitVerdictFail;
  } catch (const NumericalError& e) {
    manifest["error"] = e.what();
    outcome.status = kExitNumericalAbort;
  } catch (const InvalidArgument& e) {
    manifest["error"] = e.what();
    outcome.status = kExitConfigError;
  }
  if (out) {
    json inventory = json::array();
    for (const auto& [name, digest] : out->inventory()) {
      inventory.push_back({{"file", name}, {"sha256", digest}});
    }
    manifest["files"] = inventory;
  }
  manifest["status"] = outcome.status;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out) out->write_json("manifest.json", manifest);
  outcome.manifest = std::move(manifest);
  return outcome;
}

}  // namespace multiwell
