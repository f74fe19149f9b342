#include "multiwell/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "multiwell/descent.hpp"

namespace multiwell {

std::string to_string(SectionKind k) {
  return k == SectionKind::torus ? "torus" : "interval_neumann";
}

SectionKind section_kind_from_string(const std::string& s) {
  if (s == "interval_neumann" || s == "interval") return SectionKind::interval_neumann;
  if (s == "torus") return SectionKind::torus;
  throw InvalidArgument("unknown section kind '" + s + "'");
}

std::string to_string(KEpsFlavor f) {
  return f == KEpsFlavor::plain ? "plain" : "mean_constrained_a";
}

SectionGrid SectionGrid::interval(int points) {
  return SectionGrid(SectionKind::interval_neumann, points, 1);
}

SectionGrid SectionGrid::torus(int points, int axes) {
  return SectionGrid(SectionKind::torus, points, axes);
}

SectionGrid::SectionGrid(SectionKind kind, int points, int axes)
    : kind_(kind), points_(points), axes_(axes) {
  if (points < 8) throw InvalidArgument("SectionGrid: at least 8 points per axis required");
  if (kind == SectionKind::interval_neumann) {
    if (axes != 1) throw InvalidArgument("SectionGrid: the interval section has one axis");
    spacing_ = 1.0 / (points - 1);
    weights_.assign(points, spacing_);
    weights_.front() = weights_.back() = 0.5 * spacing_;
    for (int j = 0; j + 1 < points; ++j) {
      differences_.emplace_back(j, j + 1);
      difference_axis_.push_back(0);
    }
    difference_weight_ = 1.0 / spacing_;
  } else {
    if (axes != 1 && axes != 2) throw InvalidArgument("SectionGrid: torus must have 1 or 2 axes");
    spacing_ = 1.0 / points;
    const std::size_t count = axes == 1 ? points : static_cast<std::size_t>(points) * points;
    weights_.assign(count, 1.0 / static_cast<double>(count));
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t i0 = j % points;
      const std::size_t i1 = j / points;
      differences_.emplace_back(j, i1 * points + (i0 + 1) % points);
      difference_axis_.push_back(0);
      if (axes == 2) {
        differences_.emplace_back(j, ((i1 + 1) % points) * points + i0);
        difference_axis_.push_back(1);
      }
    }
    // Cell measure h^k times 1 / h^2 from the squared difference quotient.
    difference_weight_ = std::pow(spacing_, axes - 2);
  }
}

std::vector<double> SectionGrid::coordinates(std::size_t j) const {
  if (kind_ == SectionKind::interval_neumann) return {static_cast<double>(j) * spacing_};
  if (axes_ == 1) return {static_cast<double>(j) * spacing_};
  return {static_cast<double>(j % points_) * spacing_,
          static_cast<double>(j / points_) * spacing_};
}

SectionField::SectionField(SectionGrid g, std::size_t n, std::vector<double> v)
    : grid(std::move(g)), dimension(n), values(std::move(v)) {
  if (n == 0) throw InvalidArgument("SectionField: dimension must be >= 1");
  if (values.size() != grid.node_count() * n) {
    throw InvalidArgument("SectionField: value count does not match the grid");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw InvalidArgument("SectionField: values must be finite");
  }
}

SectionField SectionField::constant(const SectionGrid& g, std::span<const double> z) {
  std::vector<double> v;
  v.reserve(g.node_count() * z.size());
  for (std::size_t j = 0; j < g.node_count(); ++j) v.insert(v.end(), z.begin(), z.end());
  return SectionField(g, z.size(), std::move(v));
}

Point SectionField::mean() const {
  Point m(dimension, 0.0);
  const auto& w = grid.weights();
  for (std::size_t j = 0; j < w.size(); ++j) {
    for (std::size_t i = 0; i < dimension; ++i) m[i] += w[j] * values[j * dimension + i];
  }
  return m;
}

namespace {

void check_dims(std::size_t n, const PotentialSpec& spec) {
  if (n != spec.dimension()) throw InvalidArgument("section field and potential dimensions differ");
}

// e(v) over raw node-major values; writes the gradient when grad is nonempty.
SectionEnergyParts energy_raw(const SectionGrid& grid, const PotentialSpec& spec,
                              std::size_t n, std::span<const double> v, std::span<double> grad) {
  SectionEnergyParts e;
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const double c = grid.difference_weight();
  for (const auto& [a, b] : grid.differences()) {
    const double* va = v.data() + a * n;
    const double* vb = v.data() + b * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = vb[i] - va[i];
      e.gradient += c * d * d;
      if (want_grad) {
        grad[a * n + i] -= 2.0 * c * d;
        grad[b * n + i] += 2.0 * c * d;
      }
    }
  }
  const auto& w = grid.weights();
  Point gw(n);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const std::span<const double> z = v.subspan(j * n, n);
    e.potential += w[j] * spec.value(z);
    if (want_grad) {
      spec.gradient(z, gw);
      for (std::size_t i = 0; i < n; ++i) grad[j * n + i] += w[j] * gw[i];
    }
  }
  e.total = e.gradient + e.potential;
  return e;
}

// Removes the weighted-mean part of selected components of g, i.e. the
// Euclidean projection onto {sum_j w_j g_j,i = 0}.
void project_mean(const SectionGrid& grid, std::size_t n, std::span<double> g,
                  std::size_t first_component, std::size_t last_component) {
  const auto& w = grid.weights();
  double ww = 0.0;
  for (double x : w) ww += x * x;
  for (std::size_t i = first_component; i < last_component; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * g[j * n + i];
    const double f = s / ww;
    for (std::size_t j = 0; j < w.size(); ++j) g[j * n + i] -= f * w[j];
  }
}

// H^1 metric on the section, P = stiffness + mass * diag(weights), applied to
// each component. Components listed as constrained get the P-orthogonal
// projection onto {sum_j w_j d_j = 0}, so the preconditioned direction stays
// admissible.
class SectionMetric {
 public:
  SectionMetric(const SectionGrid& grid, std::size_t n, double mass,
                std::size_t first_constrained, std::size_t last_constrained)
      : n_(n), nodes_(grid.node_count()), first_(first_constrained), last_(last_constrained) {
    std::vector<Eigen::Triplet<double>> t;
    const double c = 2.0 * grid.difference_weight();
    for (const auto& [a, b] : grid.differences()) {
      t.emplace_back(a, a, c);
      t.emplace_back(b, b, c);
      t.emplace_back(a, b, -c);
      t.emplace_back(b, a, -c);
    }
    const auto& w = grid.weights();
    for (std::size_t j = 0; j < nodes_; ++j) t.emplace_back(j, j, mass * w[j]);
    Eigen::SparseMatrix<double> P(nodes_, nodes_);
    P.setFromTriplets(t.begin(), t.end());
    solver_.compute(P);
    if (solver_.info() != Eigen::Success) throw NumericalError("section metric factorization failed");
    w_ = Eigen::Map<const Eigen::VectorXd>(w.data(), nodes_);
    pw_ = solver_.solve(w_);
    wpw_ = w_.dot(pw_);
    rhs_.resize(nodes_);
  }

  void apply(std::span<const double> g, std::span<double> d) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < nodes_; ++j) rhs_[j] = g[j * n_ + i];
      Eigen::VectorXd x = solver_.solve(rhs_);
      if (i >= first_ && i < last_) x -= pw_ * (w_.dot(x) / wpw_);
      for (std::size_t j = 0; j < nodes_; ++j) d[j * n_ + i] = x[j];
    }
  }

 private:
  std::size_t n_;
  std::size_t nodes_;
  std::size_t first_;
  std::size_t last_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  Eigen::VectorXd w_;
  Eigen::VectorXd pw_;
  double wpw_ = 1.0;
  Eigen::VectorXd rhs_;
};

// Shifts component i so its weighted mean is exactly target (up to roundoff).
void fix_mean(SectionField& v, std::size_t i, double target) {
  const double m = v.mean()[i];
  for (std::size_t j = 0; j < v.grid.node_count(); ++j) v.values[j * v.dimension + i] += target - m;
}

}  // namespace

SectionEnergyParts section_energy_parts(const SectionField& v, const PotentialSpec& spec) {
  check_dims(v.dimension, spec);
  return energy_raw(v.grid, spec, v.dimension, v.values, {});
}

double section_energy(const SectionField& v, const PotentialSpec& spec) {
  return section_energy_parts(v, spec).total;
}

double section_energy_a(const SectionField& v, const PotentialSpec& spec, double a) {
  if (v.grid.kind() != SectionKind::torus) {
    throw InvalidArgument("section_energy_a: requires the torus section");
  }
  if (static_cast<std::size_t>(v.grid.axes()) + 1 != v.dimension) {
    throw InvalidArgument("section_energy_a: requires N = d");
  }
  if (std::abs(v.mean()[0] - a) > 1e-8) return kInfinity;
  return section_energy(v, spec);
}

double l2_distance(const SectionField& v, std::span<const double> z) {
  if (z.size() != v.dimension) throw InvalidArgument("l2_distance: dimension mismatch");
  const auto& w = v.grid.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    for (std::size_t i = 0; i < v.dimension; ++i) {
      const double d = v.values[j * v.dimension + i] - z[i];
      s += w[j] * d * d;
    }
  }
  return std::sqrt(s);
}

std::pair<double, std::size_t> l2_distance_to_wells(const SectionField& v,
                                                    const std::vector<Point>& wells) {
  if (wells.empty()) throw InvalidArgument("l2_distance_to_wells: no wells");
  std::pair<double, std::size_t> best{kInfinity, 0};
  for (std::size_t k = 0; k < wells.size(); ++k) {
    const double d = l2_distance(v, wells[k]);
    if (d < best.first) best = {d, k};
  }
  return best;
}

SectionField random_smooth_field(const SectionGrid& grid, std::size_t n, std::mt19937_64& rng,
                                 double amplitude) {
  constexpr int kModes = 4;
  std::normal_distribution<double> gauss;
  std::vector<double> v(grid.node_count() * n, 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    for (int axis = 0; axis < grid.axes(); ++axis) {
      for (int k = 1; k <= kModes; ++k) {
        const double ca = gauss(rng) / k;
        const double sa = gauss(rng) / k;
        for (std::size_t j = 0; j < grid.node_count(); ++j) {
          const double x = grid.coordinates(j)[axis];
          double val;
          if (grid.kind() == SectionKind::interval_neumann) {
            val = ca * std::cos(std::numbers::pi * k * x);
          } else {
            val = ca * std::cos(two_pi * k * x) + sa * std::sin(two_pi * k * x);
          }
          v[j * n + i] += val;
        }
      }
    }
  }
  SectionField f(grid, n, std::move(v));
  for (std::size_t i = 0; i < n; ++i) fix_mean(f, i, 0.0);
  const double l2 = l2_distance(f, Point(n, 0.0));
  if (l2 > 0.0) {
    for (double& x : f.values) x *= amplitude / l2;
  }
  return f;
}

AveragedPotentialResult averaged_potential(const PotentialSpec& spec, std::span<const double> z,
                                           const SectionGrid& grid,
                                           const AveragedPotentialOptions& opts) {
  require_finite_valued(spec);
  const std::size_t n = spec.dimension();
  if (z.size() != n) throw InvalidArgument("averaged_potential: dimension mismatch");
  if (opts.n_restarts < 0) throw InvalidArgument("averaged_potential: n_restarts must be >= 0");

  SectionField start = SectionField::constant(grid, z);
  AveragedPotentialResult best{Point(z.begin(), z.end()), kInfinity, start, 0.0, 0, false};
  best.constant_candidate_value = spec.value(z);

  auto objective = [&](std::span<const double> x, std::span<double> g) {
    return energy_raw(grid, spec, n, x, g).total;
  };
  auto project = [&](std::span<double> g) { project_mean(grid, n, g, 0, n); };
  SectionMetric metric(grid, n, 1.0, 0, n);
  auto precondition = [&](std::span<const double> g, std::span<double> d) { metric.apply(g, d); };
  DescentOptions dopts;
  dopts.tol = opts.tol;
  dopts.max_iter = opts.max_iter;
  dopts.initial_step = 1.0;
  dopts.stall_rel = 1e-14;

  std::mt19937_64 rng(opts.seed);
  for (int r = 0; r <= opts.n_restarts; ++r) {
    SectionField v = start;
    if (r > 0) {
      const SectionField p = random_smooth_field(grid, n, rng, opts.restart_amplitude);
      for (std::size_t k = 0; k < v.values.size(); ++k) v.values[k] += p.values[k];
      for (std::size_t i = 0; i < n; ++i) fix_mean(v, i, z[i]);
    }
    const DescentResult dr = minimize(v.values, objective, dopts, project, precondition);
    best.iterations += dr.iterations;
    for (std::size_t i = 0; i < n; ++i) fix_mean(v, i, z[i]);
    const double e = section_energy(v, spec);
    if (e < best.value) {
      best.value = e;
      best.minimizer = std::move(v);
      best.converged = dr.converged || dr.stalled;
    }
  }
  return best;
}

VPropsReport verify_V_props(const PotentialSpec& spec, const std::vector<Well>& wells,
                            const std::vector<Point>& sample_points, const SectionGrid& grid,
                            const VPropsOptions& opts) {
  VPropsReport rep;
  rep.r_check = opts.r_check;
  std::vector<Point> points = sample_points;
  for (const auto& w : wells) points.push_back(w.location);
  for (const auto& z : points) {
    const auto res = averaged_potential(spec, z, grid, opts.averaged);
    VPropsRow row{z, res.value, spec.value(z), false, false};
    row.upper_bound_ok = row.V <= row.W + opts.upper_slack;
    row.zero_set_ok = (row.V <= opts.zero_threshold) == (row.W <= opts.zero_threshold);
    rep.upper_bound_holds = rep.upper_bound_holds && row.upper_bound_ok;
    rep.zero_set_equality_holds = rep.zero_set_equality_holds && row.zero_set_ok;
    rep.rows.push_back(std::move(row));
  }
  double vmin = kInfinity;
  Point z(spec.dimension());
  for (const auto& d : sphere_directions(spec.dimension(), opts.sphere_samples, opts.averaged.seed)) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = opts.r_check * d[i];
    vmin = std::min(vmin, averaged_potential(spec, z, grid, opts.averaged).value);
  }
  rep.v_infinity_proxy = vmin;
  rep.v_infinity_positive = vmin > opts.zero_threshold;
  return rep;
}

VTable VTable::build(const PotentialSpec& spec, const SectionGrid& grid, Box box, int resolution,
                     const AveragedPotentialOptions& opts, int jobs) {
  const std::size_t n = spec.dimension();
  if (box.dimension() != n) throw InvalidArgument("VTable: box dimension mismatch");
  if (resolution < 1) throw InvalidArgument("VTable: resolution must be >= 1");
  VTable t;
  t.box_ = std::move(box);
  t.resolution_ = resolution;
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) count *= static_cast<std::size_t>(resolution + 1);
  t.values_.assign(count, 0.0);

  auto work = [&](std::size_t begin, std::size_t stride) {
    Point z(n);
    for (std::size_t idx = begin; idx < count; idx += stride) {
      std::size_t rest = idx;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = rest % static_cast<std::size_t>(resolution + 1);
        rest /= static_cast<std::size_t>(resolution + 1);
        z[i] = t.box_.lo[i] + (t.box_.hi[i] - t.box_.lo[i]) * static_cast<double>(k) / resolution;
      }
      AveragedPotentialOptions o = opts;
      o.seed = opts.seed + 0x9E3779B97F4A7C15ULL * (idx + 1);
      t.values_[idx] = averaged_potential(spec, z, grid, o).value;
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(work, k, threads);
    for (auto& th : pool) th.join();
  }
  return t;
}

double VTable::operator()(const PotentialSpec& spec, std::span<const double> z) const {
  const std::size_t n = box_.dimension();
  if (z.size() != n) throw InvalidArgument("VTable: dimension mismatch");
  if (!covers(z)) throw InvalidArgument("VTable: point outside the table range");
  // Multilinear interpolation over the enclosing cell.
  std::vector<std::size_t> base(n);
  std::vector<double> frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::clamp((z[i] - box_.lo[i]) / (box_.hi[i] - box_.lo[i]) * resolution_, 0.0,
                                static_cast<double>(resolution_));
    std::size_t k = static_cast<std::size_t>(std::floor(u));
    if (k >= static_cast<std::size_t>(resolution_)) k = resolution_ - 1;
    base[i] = k;
    frac[i] = u - static_cast<double>(k);
  }
  double v = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double weight = 1.0;
    std::size_t idx = 0, stride = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (corner >> i) & 1U;
      weight *= up ? frac[i] : 1.0 - frac[i];
      idx += (base[i] + (up ? 1 : 0)) * stride;
      stride *= static_cast<std::size_t>(resolution_ + 1);
    }
    if (weight != 0.0) v += weight * values_[idx];
  }
  return std::min(v, spec.value(z));
}

std::vector<Point> wells_on_slice(const std::vector<Well>& wells, double a) {
  std::vector<Point> out;
  for (const auto& w : wells) {
    if (!w.location.empty() && std::abs(w.location[0] - a) <= 1e-6) out.push_back(w.location);
  }
  return out;
}

namespace {

struct PenaltyState {
  const SectionGrid* grid;
  const PotentialSpec* spec;
  const std::vector<Point>* wells;
  std::size_t n;
  double eps;
  double mu;
};

double penalty_objective(const PenaltyState& s, std::span<const double> x, std::span<double> g) {
  const double e = energy_raw(*s.grid, *s.spec, s.n, x, g).total;
  const auto& w = s.grid->weights();
  // Nearest well and distance.
  double best = kInfinity;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < s.wells->size(); ++k) {
    const Point& p = (*s.wells)[k];
    double d2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      for (std::size_t i = 0; i < s.n; ++i) {
        const double d = x[j * s.n + i] - p[i];
        d2 += w[j] * d * d;
      }
    }
    if (d2 < best) {
      best = d2;
      arg = k;
    }
  }
  const double d = std::sqrt(best);
  const double gap = s.eps - d;
  if (gap <= 0.0) return e;
  if (d > 0.0) {
    const Point& p = (*s.wells)[arg];
    const double f = -2.0 * s.mu * gap / d;
    for (std::size_t j = 0; j < w.size(); ++j) {
      for (std::size_t i = 0; i < s.n; ++i) g[j * s.n + i] += f * w[j] * (x[j * s.n + i] - p[i]);
    }
  }
  return e + s.mu * gap * gap;
}

// Moves v radially away from its nearest well until d(v, wells) >= eps.
void make_feasible(SectionField& v, const std::vector<Point>& wells, double eps) {
  for (int it = 0; it < 8; ++it) {
    const auto [d, k] = l2_distance_to_wells(v, wells);
    if (d >= eps) return;
    if (d == 0.0) return;
    const double f = eps / d * (1.0 + 1e-12);
    const Point& p = wells[k];
    for (std::size_t j = 0; j < v.grid.node_count(); ++j) {
      for (std::size_t i = 0; i < v.dimension; ++i) {
        double& x = v.values[j * v.dimension + i];
        x = p[i] + f * (x - p[i]);
      }
    }
  }
}

}  // namespace

KEpsResult k_epsilon(const PotentialSpec& spec, const SectionGrid& grid, double eps,
                     const std::vector<Well>& wells, KEpsFlavor flavor, std::optional<double> a,
                     const KEpsOptions& opts, const std::vector<SectionField>& warm_starts) {
  require_finite_valued(spec);
  const std::size_t n = spec.dimension();
  if (!(eps > 0.0)) throw InvalidArgument("k_epsilon: eps must be > 0");
  if (wells.empty()) throw InvalidArgument("k_epsilon: no wells");
  if (flavor == KEpsFlavor::mean_constrained_a && !a) {
    throw InvalidArgument("k_epsilon: the mean-constrained flavor needs a");
  }
  std::vector<Point> sigma;
  if (flavor == KEpsFlavor::plain) {
    for (const auto& w : wells) sigma.push_back(w.location);
  } else {
    sigma = wells_on_slice(wells, *a);
    if (sigma.empty()) throw InvalidArgument("k_epsilon: no well has first coordinate a");
  }
  const bool constrained = flavor == KEpsFlavor::mean_constrained_a;

  // Starting fields.
  std::vector<SectionField> starts;
  std::mt19937_64 rng(opts.seed);
  const std::size_t free_dim = constrained ? n - 1 : n;
  for (const auto& p : sigma) {
    if (free_dim > 0) {
      for (const auto& u : sphere_directions(free_dim, opts.direction_count, opts.seed)) {
        Point z = p;
        for (std::size_t i = 0; i < free_dim; ++i) z[i + (constrained ? 1 : 0)] += 1.05 * eps * u[i];
        starts.push_back(SectionField::constant(grid, z));
      }
    }
    for (int r = 0; r < opts.n_random_starts; ++r) {
      SectionField f = random_smooth_field(grid, n, rng, 1.05 * eps);
      for (std::size_t j = 0; j < grid.node_count(); ++j) {
        for (std::size_t i = 0; i < n; ++i) f.values[j * n + i] += p[i];
      }
      starts.push_back(std::move(f));
    }
  }
  for (const auto& w : warm_starts) {
    if (w.grid == grid && w.dimension == n) starts.push_back(w);
  }

  auto project = [&](std::span<double> g) {
    if (constrained) project_mean(grid, n, g, 0, 1);
  };
  SectionMetric metric(grid, n, 1.0, 0, constrained ? 1 : 0);
  auto precondition = [&](std::span<const double> g, std::span<double> d) { metric.apply(g, d); };

  KEpsResult best{eps, kInfinity, SectionField::constant(grid, sigma.front()), 0.0, flavor, a, false};
  for (auto& v : starts) {
    if (constrained) fix_mean(v, 0, *a);
    PenaltyState st{&grid, &spec, &sigma, n, eps, opts.mu0};
    for (int round = 0; round < opts.penalty_rounds; ++round) {
      auto objective = [&](std::span<const double> x, std::span<double> g) {
        return penalty_objective(st, x, g);
      };
      DescentOptions dopts;
      dopts.tol = opts.tol;
      dopts.max_iter = opts.max_iter_per_round;
      dopts.initial_step = 1.0;
      dopts.stall_rel = 1e-14;
      minimize(v.values, objective, dopts, project, precondition);
      st.mu *= opts.mu_factor;
    }
    if (constrained) fix_mean(v, 0, *a);
    make_feasible(v, sigma, eps);
    const double d = l2_distance_to_wells(v, sigma).first;
    if (d < eps - 1e-6) continue;
    const double e = section_energy(v, spec);
    if (e < best.value) {
      best.value = e;
      best.witness = v;
      best.constrained_distance = d;
    }
  }
  if (!std::isfinite(best.value)) {
    throw NumericalError("k_epsilon: no feasible iterate found");
  }
  best.active = best.constrained_distance <= eps * (1.0 + 1e-3);
  return best;
}

std::vector<KEpsResult> k_epsilon_ladder(const PotentialSpec& spec, const SectionGrid& grid,
                                         const std::vector<double>& eps_values,
                                         const std::vector<Well>& wells, KEpsFlavor flavor,
                                         std::optional<double> a, const KEpsOptions& opts) {
  std::vector<std::size_t> order(eps_values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return eps_values[x] > eps_values[y]; });
  std::vector<std::optional<KEpsResult>> out(eps_values.size());
  std::vector<SectionField> warm;
  for (std::size_t idx : order) {
    KEpsResult r = k_epsilon(spec, grid, eps_values[idx], wells, flavor, a, opts, warm);
    warm.push_back(r.witness);
    out[idx] = std::move(r);
  }
  std::vector<KEpsResult> res;
  for (auto& r : out) res.push_back(std::move(*r));
  return res;
}

}  // namespace multiwell
