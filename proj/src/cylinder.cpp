#include "multiwell/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace multiwell {

std::string to_string(EndCondition e) {
  return e == EndCondition::neumann_ends ? "neumann_ends" : "clamped_to_wells";
}

EndCondition end_condition_from_string(const std::string& s) {
  if (s == "neumann_ends" || s == "neumann") return EndCondition::neumann_ends;
  if (s == "clamped_to_wells" || s == "clamped") return EndCondition::clamped_to_wells;
  throw InvalidArgument("unknown end condition '" + s + "'");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::constant_well:
      return "constant_well";
    case InitialKind::heteroclinic_extension:
      return "heteroclinic_extension";
    case InitialKind::perturbed:
      return "perturbed";
    case InitialKind::two_connection_interp:
      return "two_connection_interp";
    case InitialKind::divfree_harmonic:
      return "divfree_harmonic";
  }
  return "unknown";
}

InitialKind initial_kind_from_string(const std::string& s) {
  for (auto k : {InitialKind::constant_well, InitialKind::heteroclinic_extension,
                 InitialKind::perturbed, InitialKind::two_connection_interp,
                 InitialKind::divfree_harmonic}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown initial kind '" + s + "'");
}

CylinderGrid::CylinderGrid(double L_, std::size_t M1_, SectionGrid section_, EndCondition end,
                           Point w_minus_, Point w_plus_)
    : L(L_),
      M1(M1_),
      section(std::move(section_)),
      end_condition(end),
      w_minus(std::move(w_minus_)),
      w_plus(std::move(w_plus_)) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("CylinderGrid: L must be > 0");
  if (M1 < 16) throw InvalidArgument("CylinderGrid: M1 must be >= 16");
  if (end == EndCondition::clamped_to_wells) {
    if (w_minus.empty() || w_minus.size() != w_plus.size()) {
      throw InvalidArgument("CylinderGrid: clamped ends need both well values");
    }
  }
}

CylinderField::CylinderField(CylinderGrid g, std::size_t n, std::vector<double> v)
    : grid(std::move(g)), dimension(n), values(std::move(v)) {
  if (n == 0) throw InvalidArgument("CylinderField: dimension must be >= 1");
  if (values.size() != grid.node_count() * n) {
    throw InvalidArgument("CylinderField: value count does not match the grid");
  }
  if (grid.end_condition == EndCondition::clamped_to_wells && grid.w_minus.size() != n) {
    throw InvalidArgument("CylinderField: clamped well dimension mismatch");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw InvalidArgument("CylinderField: values must be finite");
  }
}

SectionField CylinderField::slice(std::size_t i) const {
  const std::size_t S = grid.section.node_count();
  const auto first = values.begin() + static_cast<std::ptrdiff_t>(i * S * dimension);
  return SectionField(grid.section, dimension,
                      std::vector<double>(first, first + static_cast<std::ptrdiff_t>(S * dimension)));
}

namespace {

void check_spec(const CylinderField& u, const PotentialSpec& spec) {
  if (u.dimension != spec.dimension()) {
    throw InvalidArgument("cylinder field and potential dimensions differ");
  }
}

// Weighted graph of the energy: E = sum_pairs c |u_a - u_b|^2 + sum_g m_g W(u_g).
struct Assembly {
  std::vector<std::uint32_t> a, b;
  std::vector<double> c;
  std::vector<double> mass;
};

Assembly assemble(const CylinderGrid& g) {
  Assembly as;
  const std::size_t S = g.section.node_count();
  const double h1 = g.h1();
  const auto& w = g.section.weights();
  const double dw = g.section.difference_weight();
  as.mass.resize(g.node_count());
  for (std::size_t i = 0; i < g.M1; ++i) {
    const double tw = g.axial_weight(i) * h1;
    for (std::size_t j = 0; j < S; ++j) as.mass[i * S + j] = tw * w[j];
    for (const auto& [p, q] : g.section.differences()) {
      as.a.push_back(static_cast<std::uint32_t>(i * S + p));
      as.b.push_back(static_cast<std::uint32_t>(i * S + q));
      as.c.push_back(tw * dw);
    }
    if (i + 1 < g.M1) {
      for (std::size_t j = 0; j < S; ++j) {
        as.a.push_back(static_cast<std::uint32_t>(i * S + j));
        as.b.push_back(static_cast<std::uint32_t>((i + 1) * S + j));
        as.c.push_back(w[j] / h1);
      }
    }
  }
  return as;
}

double energy_with(const Assembly& as, const std::vector<double>& u, std::size_t n,
                   const PotentialSpec& spec) {
  double kin = 0.0;
  for (std::size_t p = 0; p < as.c.size(); ++p) {
    const double* x = u.data() + as.a[p] * n;
    const double* y = u.data() + as.b[p] * n;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (y[i] - x[i]) * (y[i] - x[i]);
    kin += as.c[p] * d2;
  }
  double pot = 0.0;
  for (std::size_t g = 0; g < as.mass.size(); ++g) {
    pot += as.mass[g] * spec.value(std::span<const double>(u.data() + g * n, n));
  }
  return kin + pot;
}

// (K u) per node and component.
std::vector<double> stiffness_times(const Assembly& as, const std::vector<double>& u,
                                    std::size_t n) {
  std::vector<double> ku(u.size(), 0.0);
  for (std::size_t p = 0; p < as.c.size(); ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = as.c[p] * (u[as.a[p] * n + i] - u[as.b[p] * n + i]);
      ku[as.a[p] * n + i] += d;
      ku[as.b[p] * n + i] -= d;
    }
  }
  return ku;
}

double residual_with(const CylinderGrid& g, const Assembly& as, const std::vector<double>& u,
                     std::size_t n, const PotentialSpec& spec) {
  const auto ku = stiffness_times(as, u, n);
  const std::size_t S = g.section.node_count();
  Point gw(n);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < g.M1; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      const std::size_t node = i * S + j;
      spec.gradient(std::span<const double>(u.data() + node * n, n), gw);
      double r2 = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        const double r = -ku[node * n + c] / as.mass[node] - 0.5 * gw[c];
        r2 += r * r;
      }
      worst = std::max(worst, std::sqrt(r2));
    }
  }
  return worst;
}

void fix_first_average(CylinderField& u, double a) {
  const std::size_t S = u.grid.section.node_count();
  const auto& w = u.grid.section.weights();
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < S; ++j) m += w[j] * u.at(i, j)[0];
    for (std::size_t j = 0; j < S; ++j) u.at(i, j)[0] += a - m;
  }
}

void check_clamped_ends(const CylinderField& u, double tol) {
  if (u.grid.end_condition != EndCondition::clamped_to_wells) return;
  const std::size_t S = u.grid.section.node_count();
  for (std::size_t j = 0; j < S; ++j) {
    if (distance(u.at(0, j), u.grid.w_minus) > tol ||
        distance(u.at(u.grid.M1 - 1, j), u.grid.w_plus) > tol) {
      throw InvalidArgument("relax: end slices do not match the clamped wells");
    }
  }
}

}  // namespace

double cylinder_energy(const CylinderField& u, const PotentialSpec& spec) {
  check_spec(u, spec);
  return energy_with(assemble(u.grid), u.values, u.dimension, spec);
}

double axial_kinetic_energy(const CylinderField& u) {
  const std::size_t S = u.grid.section.node_count();
  const auto& w = u.grid.section.weights();
  const double h1 = u.grid.h1();
  double k = 0.0;
  for (std::size_t i = 0; i + 1 < u.grid.M1; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      k += w[j] * distance(u.at(i, j), u.at(i + 1, j)) * distance(u.at(i, j), u.at(i + 1, j)) / h1;
    }
  }
  return k;
}

namespace {

// ||d_1 u||^2_{L^2(omega)} on the cell (i, i + 1).
double cell_kinetic(const CylinderField& u, std::size_t i) {
  const std::size_t S = u.grid.section.node_count();
  const auto& w = u.grid.section.weights();
  const double h1 = u.grid.h1();
  double k = 0.0;
  for (std::size_t j = 0; j < S; ++j) {
    const double d = distance(u.at(i, j), u.at(i + 1, j)) / h1;
    k += w[j] * d * d;
  }
  return k;
}

double node_kinetic(const CylinderField& u, std::size_t i) {
  if (i == 0) return cell_kinetic(u, 0);
  if (i + 1 == u.grid.M1) return cell_kinetic(u, i - 1);
  return 0.5 * (cell_kinetic(u, i - 1) + cell_kinetic(u, i));
}

}  // namespace

double slice_decomposition_energy(const CylinderField& u, const PotentialSpec& spec) {
  check_spec(u, spec);
  const double h1 = u.grid.h1();
  double e = 0.0;
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    e += u.grid.axial_weight(i) * h1 * (node_kinetic(u, i) + section_energy(u.slice(i), spec));
  }
  return e;
}

double stationarity_residual(const CylinderField& u, const PotentialSpec& spec) {
  check_spec(u, spec);
  return residual_with(u.grid, assemble(u.grid), u.values, u.dimension, spec);
}

CylinderField relax(const CylinderField& u0, const PotentialSpec& spec, const RelaxOptions& opts,
                    RunReport& report) {
  require_finite_valued(spec);
  check_spec(u0, spec);
  check_clamped_ends(u0, 1e-8);
  if (!(opts.dt > 0.0)) throw InvalidArgument("relax: dt must be > 0");
  const std::size_t n = u0.dimension;
  const CylinderGrid& g = u0.grid;
  const std::size_t S = g.section.node_count();
  const std::size_t N = g.node_count();
  const bool clamped = g.end_condition == EndCondition::clamped_to_wells;
  auto is_clamped = [&](std::size_t node) {
    return clamped && (node < S || node >= N - S);
  };
  const Assembly as = assemble(g);

  CylinderField u = u0;
  if (opts.first_component_average) fix_first_average(u, *opts.first_component_average);
  double E = energy_with(as, u.values, n, spec);
  if (!std::isfinite(E)) throw NumericalError("relax: initial energy is not finite");
  const double E0 = E;
  report.energy_history = {E};
  report.steps = 0;
  report.rejected_steps = 0;
  report.converged = false;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  auto factor = [&](double dt) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(N + 4 * as.c.size());
    for (std::size_t k = 0; k < N; ++k) t.emplace_back(k, k, is_clamped(k) ? 1.0 : as.mass[k]);
    for (std::size_t p = 0; p < as.c.size(); ++p) {
      const std::size_t x = as.a[p], y = as.b[p];
      const double c = 2.0 * dt * as.c[p];
      if (!is_clamped(x)) t.emplace_back(x, x, c);
      if (!is_clamped(y)) t.emplace_back(y, y, c);
      if (!is_clamped(x) && !is_clamped(y)) {
        t.emplace_back(x, y, -c);
        t.emplace_back(y, x, -c);
      }
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(t.begin(), t.end());
    solver.compute(A);
    if (solver.info() != Eigen::Success) throw NumericalError("relax: factorization failed");
  };

  double dt = opts.dt;
  factor(dt);
  std::size_t accepted_since_cut = 0;
  Eigen::VectorXd rhs(N);
  std::vector<double> next(u.values.size());
  Point gw(n);
  std::vector<double> gradW(u.values.size());
  report.stop_reason = "max_steps";
  for (std::size_t step = 0; step < opts.max_steps; ++step) {
    for (std::size_t k = 0; k < N; ++k) {
      spec.gradient(std::span<const double>(u.values.data() + k * n, n), gw);
      for (std::size_t c = 0; c < n; ++c) gradW[k * n + c] = gw[c];
    }
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t k = 0; k < N; ++k) {
        const double x = u.values[k * n + c];
        rhs[k] = is_clamped(k) ? x : as.mass[k] * (x - dt * gradW[k * n + c]);
      }
      if (clamped) {
        for (std::size_t p = 0; p < as.c.size(); ++p) {
          const std::size_t x = as.a[p], y = as.b[p];
          const double cc = 2.0 * dt * as.c[p];
          if (is_clamped(x) && !is_clamped(y)) rhs[y] += cc * u.values[x * n + c];
          if (is_clamped(y) && !is_clamped(x)) rhs[x] += cc * u.values[y * n + c];
        }
      }
      const Eigen::VectorXd sol = solver.solve(rhs);
      for (std::size_t k = 0; k < N; ++k) next[k * n + c] = sol[k];
    }
    CylinderField trial(g, n, next);
    if (opts.first_component_average) fix_first_average(trial, *opts.first_component_average);
    const double E_new = energy_with(as, trial.values, n, spec);
    if (!std::isfinite(E_new) || E_new > E + 1e-12 * (1.0 + std::abs(E0))) {
      ++report.rejected_steps;
      dt *= 0.5;
      if (dt < opts.min_dt) {
        report.final_dt = dt;
        throw NumericalError(std::isfinite(E_new) ? "relax: step size underflow"
                                                  : "relax: energy diverged");
      }
      factor(dt);
      accepted_since_cut = 0;
      continue;
    }
    const double decrease = E - E_new;
    u = std::move(trial);
    E = E_new;
    report.energy_history.push_back(E);
    ++report.steps;
    if (dt < opts.dt && ++accepted_since_cut >= 20) {
      dt = std::min(opts.dt, 2.0 * dt);
      factor(dt);
      accepted_since_cut = 0;
    }
    if (decrease < opts.stall) {
      const double r = residual_with(g, as, u.values, n, spec);
      if (r <= opts.residual_tol) {
        report.stop_reason = "converged";
        break;
      }
    }
  }
  report.final_energy = E;
  report.final_dt = dt;
  report.residual = residual_with(g, as, u.values, n, spec);
  report.converged = report.residual <= opts.residual_tol && report.stop_reason == "converged";
  return u;
}

std::vector<SliceDiagnostics> slice_diagnostics(const CylinderField& u, const PotentialSpec& spec,
                                                const std::vector<Well>& wells,
                                                std::optional<double> a) {
  check_spec(u, spec);
  if (wells.empty()) throw InvalidArgument("slice_diagnostics: no wells");
  const std::size_t S = u.grid.section.node_count();
  const std::size_t n = u.dimension;
  const SectionGrid& sec = u.grid.section;
  const bool div_available = a && sec.kind() == SectionKind::torus &&
                             static_cast<std::size_t>(sec.axes()) + 1 == n;
  std::vector<SliceDiagnostics> out;
  out.reserve(u.grid.M1);
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    const SectionField s = u.slice(i);
    SliceDiagnostics d;
    d.x1 = u.grid.x1(i);
    for (const auto& w : wells) {
      d.dist_to_well.push_back(l2_distance(s, w.location));
      double sup = 0.0;
      for (std::size_t j = 0; j < S; ++j) sup = std::max(sup, distance(s.node(j), w.location));
      d.sup_dist_to_well.push_back(sup);
    }
    d.average = s.mean();
    d.slice_e = section_energy(s, spec);
    d.kinetic = node_kinetic(u, i);
    if (a) d.average_first_component = d.average[0];
    if (div_available) {
      const double h1 = u.grid.h1();
      const double h = sec.spacing();
      const int P = sec.points_per_axis();
      double worst = 0.0;
      for (std::size_t j = 0; j < S; ++j) {
        double div;
        if (i == 0) {
          div = (u.at(1, j)[0] - u.at(0, j)[0]) / h1;
        } else if (i + 1 == u.grid.M1) {
          div = (u.at(i, j)[0] - u.at(i - 1, j)[0]) / h1;
        } else {
          div = (u.at(i + 1, j)[0] - u.at(i - 1, j)[0]) / (2.0 * h1);
        }
        for (int axis = 0; axis < sec.axes(); ++axis) {
          const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(P);
          const std::size_t k = (j / stride) % P;
          const std::size_t up = j + (((k + 1) % P) - k) * stride;
          const std::size_t down = j + (((k + P - 1) % P) - k) * stride;
          div += (u.at(i, up)[axis + 1] - u.at(i, down)[axis + 1]) / (2.0 * h);
        }
        worst = std::max(worst, std::abs(div));
      }
      d.div_residual = worst;
    }
    out.push_back(std::move(d));
  }
  return out;
}

double jensen_check(const CylinderField& u, const PotentialSpec& spec, const VTable& V,
                    double x1_lo, double x1_hi) {
  check_spec(u, spec);
  const double h1 = u.grid.h1();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < u.grid.M1; ++i) {
    const double x = u.grid.x1(i);
    if (x >= x1_lo - 1e-12 && x <= x1_hi + 1e-12) idx.push_back(i);
  }
  if (idx.size() < 2) throw InvalidArgument("jensen_check: interval holds fewer than two slices");
  double lhs = 0.0, rhs = 0.0;
  std::vector<Point> means;
  for (std::size_t i : idx) means.push_back(u.slice(i).mean());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double tw = (k == 0 || k + 1 == idx.size() ? 0.5 : 1.0) * h1;
    if (!V.covers(means[k])) throw InvalidArgument("jensen_check: average leaves the V table range");
    lhs += tw * section_energy(u.slice(idx[k]), spec);
    rhs += tw * V(spec, means[k]);
    if (k + 1 < idx.size()) {
      lhs += h1 * cell_kinetic(u, idx[k]);
      const double d = distance(means[k], means[k + 1]) / h1;
      rhs += h1 * d * d;
    }
  }
  return lhs - rhs;
}

double holder_check(const CylinderField& u, std::size_t n_pairs, std::uint64_t seed) {
  const double kin = axial_kinetic_energy(u);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, u.grid.M1 - 1);
  std::vector<SectionField> cache;
  double worst = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    std::size_t t = pick(rng), s = pick(rng);
    while (s == t) s = pick(rng);
    const SectionField a = u.slice(t);
    const SectionField b = u.slice(s);
    const auto& w = u.grid.section.weights();
    double d2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double d = distance(a.node(j), b.node(j));
      d2 += w[j] * d * d;
    }
    const double gap = std::abs(u.grid.x1(t) - u.grid.x1(s));
    const double ratio = d2 == 0.0 ? 0.0 : d2 / (gap * kin);
    worst = std::max(worst, ratio);
  }
  return worst;
}

TraceVerdict trace_convergence_verdict(const std::vector<SliceDiagnostics>& diags,
                                       const std::vector<Well>& wells, const TraceOptions& opts) {
  TraceVerdict v;
  if (diags.size() < 2 || wells.empty()) {
    v.failures.push_back("diagnostics do not cover the cylinder");
    return v;
  }
  const auto nearest = [](const SliceDiagnostics& d) {
    return static_cast<std::size_t>(std::min_element(d.dist_to_well.begin(), d.dist_to_well.end()) -
                                    d.dist_to_well.begin());
  };
  v.well_minus = nearest(diags.front());
  v.well_plus = nearest(diags.back());
  const std::size_t outer = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(opts.outer_fraction * static_cast<double>(diags.size()))));
  for (std::size_t k = 0; k < outer; ++k) {
    const auto& lo = diags[k];
    const auto& hi = diags[diags.size() - 1 - k];
    v.max_dist_minus = std::max(v.max_dist_minus, lo.dist_to_well[v.well_minus]);
    v.max_dist_plus = std::max(v.max_dist_plus, hi.dist_to_well[v.well_plus]);
    v.max_sup_dist_minus = std::max(v.max_sup_dist_minus, lo.sup_dist_to_well[v.well_minus]);
    v.max_sup_dist_plus = std::max(v.max_sup_dist_plus, hi.sup_dist_to_well[v.well_plus]);
    v.max_average_dev_minus =
        std::max(v.max_average_dev_minus, distance(lo.average, wells[v.well_minus].location));
    v.max_average_dev_plus =
        std::max(v.max_average_dev_plus, distance(hi.average, wells[v.well_plus].location));
  }
  if (v.max_dist_minus > opts.trace_tol) v.failures.push_back("outer slices at -L are not near a well");
  if (v.max_dist_plus > opts.trace_tol) v.failures.push_back("outer slices at +L are not near a well");
  if (v.max_average_dev_minus > opts.trace_tol) v.failures.push_back("x'-average at -L is not near u-");
  if (v.max_average_dev_plus > opts.trace_tol) v.failures.push_back("x'-average at +L is not near u+");
  if (opts.a) {
    for (const auto& d : diags) {
      const double m = d.average_first_component.value_or(d.average[0]);
      v.max_a_dev = std::max(v.max_a_dev, std::abs(m - *opts.a));
    }
    if (v.max_a_dev > opts.a_tol) v.failures.push_back("x'-average of u_1 departs from a");
    for (std::size_t k : {v.well_minus, v.well_plus}) {
      if (std::abs(wells[k].location[0] - *opts.a) > 1e-6) {
        v.failures.push_back("limit well is not on the slice z_1 = a");
      }
    }
  }
  if (opts.divergence_free) {
    bool any = false;
    for (const auto& d : diags) {
      if (d.div_residual) {
        any = true;
        v.max_div = std::max(v.max_div, *d.div_residual);
      }
    }
    if (!any) v.failures.push_back("divergence residual unavailable");
    if (v.max_div > opts.div_tol) v.failures.push_back("field is not discretely divergence-free");
  }
  v.pass = v.failures.empty();
  return v;
}

CylinderField make_constant(const CylinderGrid& grid, std::span<const double> z) {
  std::vector<double> v;
  v.reserve(grid.node_count() * z.size());
  for (std::size_t k = 0; k < grid.node_count(); ++k) v.insert(v.end(), z.begin(), z.end());
  return CylinderField(grid, z.size(), std::move(v));
}

CylinderField make_heteroclinic_extension(const CylinderGrid& grid, const Curve& curve) {
  const std::size_t n = curve.dimension();
  const std::size_t S = grid.section.node_count();
  std::vector<double> v;
  v.reserve(grid.node_count() * n);
  for (std::size_t i = 0; i < grid.M1; ++i) {
    const Point p = curve.at(grid.x1(i));
    for (std::size_t j = 0; j < S; ++j) v.insert(v.end(), p.begin(), p.end());
  }
  return CylinderField(grid, n, std::move(v));
}

CylinderField make_perturbed(const CylinderField& base, std::uint64_t seed, double amplitude) {
  constexpr int kModes = 3;
  const CylinderGrid& g = base.grid;
  const std::size_t n = base.dimension;
  const std::size_t S = g.section.node_count();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<SectionField> psi;
  std::vector<double> coef;
  for (int k = 1; k <= kModes; ++k) {
    SectionField f = random_smooth_field(g.section, n, rng, 1.0);
    const double m = max_abs(f.values);
    if (m > 0.0) {
      for (double& x : f.values) x /= m;
    }
    psi.push_back(std::move(f));
    coef.push_back(gauss(rng) / k);
  }
  std::vector<double> pert(base.values.size(), 0.0);
  for (std::size_t i = 0; i < g.M1; ++i) {
    const double s = (g.x1(i) + g.L) / (2.0 * g.L);
    for (int k = 0; k < kModes; ++k) {
      const double b = coef[k] * std::sin((k + 1) * std::numbers::pi * s);
      for (std::size_t j = 0; j < S; ++j) {
        for (std::size_t c = 0; c < n; ++c) pert[(i * S + j) * n + c] += b * psi[k].values[j * n + c];
      }
    }
  }
  // Exact zeros on the end slices keep clamped data intact.
  std::fill(pert.begin(), pert.begin() + static_cast<std::ptrdiff_t>(S * n), 0.0);
  std::fill(pert.end() - static_cast<std::ptrdiff_t>(S * n), pert.end(), 0.0);
  const double m = max_abs(pert);
  std::vector<double> v = base.values;
  if (m > 0.0) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += amplitude * pert[k] / m;
  }
  return CylinderField(g, n, std::move(v));
}

CylinderField make_two_connection_interp(const CylinderGrid& grid, const Curve& gamma1,
                                         const Curve& gamma2) {
  if (gamma1.dimension() != gamma2.dimension()) {
    throw InvalidArgument("make_two_connection_interp: curve dimensions differ");
  }
  const std::size_t n = gamma1.dimension();
  const std::size_t S = grid.section.node_count();
  std::vector<double> v;
  v.reserve(grid.node_count() * n);
  for (std::size_t i = 0; i < grid.M1; ++i) {
    const Point p = gamma1.at(grid.x1(i));
    const Point q = gamma2.at(grid.x1(i));
    for (std::size_t j = 0; j < S; ++j) {
      const double x = grid.section.coordinates(j)[0];
      const double chi = grid.section.kind() == SectionKind::torus
                             ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x))
                             : x;
      for (std::size_t c = 0; c < n; ++c) v.push_back((1.0 - chi) * p[c] + chi * q[c]);
    }
  }
  return CylinderField(grid, n, std::move(v));
}

CylinderField make_divfree_harmonic(const CylinderField& base, double alpha, double width) {
  const CylinderGrid& g = base.grid;
  if (g.section.kind() != SectionKind::torus || g.section.axes() != 1 || base.dimension != 2) {
    throw InvalidArgument("make_divfree_harmonic: needs a 1-axis torus section and N = 2");
  }
  if (!(width > 0.0)) throw InvalidArgument("make_divfree_harmonic: width must be > 0");
  const std::size_t S = g.section.node_count();
  const int P = g.section.points_per_axis();
  const double h1 = g.h1();
  const double h = g.section.spacing();
  std::vector<double> psi(g.M1 * S);
  for (std::size_t i = 0; i < g.M1; ++i) {
    const double x1 = g.x1(i);
    const double phi = alpha * std::exp(-x1 * x1 / (2.0 * width * width));
    for (std::size_t j = 0; j < S; ++j) {
      psi[i * S + j] = phi * std::sin(2.0 * std::numbers::pi * g.section.coordinates(j)[0]);
    }
  }
  CylinderField u = base;
  for (std::size_t i = 0; i < g.M1; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      const std::size_t up = (j + 1) % P, down = (j + P - 1) % P;
      const double d2 = (psi[i * S + up] - psi[i * S + down]) / (2.0 * h);
      double d1;
      if (i == 0) {
        d1 = (psi[S + j] - psi[j]) / h1;
      } else if (i + 1 == g.M1) {
        d1 = (psi[i * S + j] - psi[(i - 1) * S + j]) / h1;
      } else {
        d1 = (psi[(i + 1) * S + j] - psi[(i - 1) * S + j]) / (2.0 * h1);
      }
      u.at(i, j)[0] += d2;
      u.at(i, j)[1] -= d1;
    }
  }
  return u;
}

CylinderField make_initial(InitialKind kind, const CylinderGrid& grid, std::size_t n,
                           const InitialParams& params) {
  switch (kind) {
    case InitialKind::constant_well:
      if (params.well.size() != n) throw InvalidArgument("make_initial: well dimension mismatch");
      return make_constant(grid, params.well);
    case InitialKind::heteroclinic_extension:
      if (!params.curve || params.curve->dimension() != n) {
        throw InvalidArgument("make_initial: heteroclinic_extension needs a curve of dimension N");
      }
      return make_heteroclinic_extension(grid, *params.curve);
    case InitialKind::perturbed:
      if (!params.base || params.base->dimension != n) {
        throw InvalidArgument("make_initial: perturbed needs a base field of dimension N");
      }
      return make_perturbed(*params.base, params.seed, params.amplitude);
    case InitialKind::two_connection_interp:
      if (!params.curve || !params.curve2 || params.curve->dimension() != n) {
        throw InvalidArgument("make_initial: two_connection_interp needs two curves of dimension N");
      }
      return make_two_connection_interp(grid, *params.curve, *params.curve2);
    case InitialKind::divfree_harmonic:
      if (!params.base || params.base->dimension != n) {
        throw InvalidArgument("make_initial: divfree_harmonic needs a base field of dimension N");
      }
      return make_divfree_harmonic(*params.base, params.amplitude, params.width);
  }
  throw InvalidArgument("make_initial: unknown kind");
}

}  // namespace multiwell
