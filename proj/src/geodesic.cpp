#include "multiwell/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>

#include "h1_metric.hpp"

namespace multiwell {

std::string to_string(GeodesicMethod m) {
  switch (m) {
    case GeodesicMethod::curve_relaxation:
      return "curve_relaxation";
    case GeodesicMethod::grid_oracle:
      return "grid_oracle";
  }
  return "unknown";
}

namespace {

void check_point(const PotentialSpec& spec, std::span<const double> z, const char* what) {
  if (z.size() != spec.dimension()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch");
  }
  for (double v : z) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite point");
  }
}

double segment_length(const PotentialSpec& spec, std::span<const double> a,
                      std::span<const double> b) {
  Point mid(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
  return 2.0 * std::sqrt(spec.value(mid)) * distance(a, b);
}

// Discrete length over the full sample vector, with gradient.
double length_objective(const PotentialSpec& spec, std::size_t n,
                        std::span<const double> x, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t segs = x.size() / n - 1;
  Point mid(n), gw(n), d(n);
  double total = 0.0;
  for (std::size_t k = 0; k < segs; ++k) {
    const double* a = x.data() + k * n;
    const double* b = a + n;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = b[i] - a[i];
      d2 += d[i] * d[i];
      mid[i] = 0.5 * (a[i] + b[i]);
    }
    const double w = spec.value(mid);
    if (!std::isfinite(w)) return kInfinity;
    const double sw = std::sqrt(w);
    const double len = std::sqrt(d2);
    total += 2.0 * sw * len;
    double* ga = grad.data() + k * n;
    double* gb = ga + n;
    if (sw > 0.0) {
      spec.gradient(mid, gw);
      for (std::size_t i = 0; i < n; ++i) {
        const double pot = 0.5 * gw[i] * len / sw;
        ga[i] += pot;
        gb[i] += pot;
      }
    }
    if (len > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double kin = 2.0 * sw * d[i] / len;
        ga[i] -= kin;
        gb[i] += kin;
      }
    }
  }
  return total;
}

void add_transverse_bump(Curve& c, std::span<const double> x, std::span<const double> y,
                         double amplitude, std::uint64_t seed) {
  const std::size_t n = c.dimension();
  if (n < 2 || amplitude == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Point axis(n), dir(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = y[i] - x[i];
  const double an = norm(axis);
  double dn = 0.0;
  do {
    for (auto& v : dir) v = gauss(rng);
    if (an > 0.0) {
      const double p = dot(dir, axis) / (an * an);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= p * axis[i];
    }
    dn = norm(dir);
  } while (dn < 1e-8);
  const std::size_t M = c.segments();
  for (std::size_t k = 1; k < M; ++k) {
    const double bump = std::sin(std::numbers::pi * static_cast<double>(k) / M);
    auto p = c.node(k);
    for (std::size_t i = 0; i < n; ++i) p[i] += amplitude * bump * dir[i] / dn;
  }
}

}  // namespace

GeodesicResult geod_upper(const PotentialSpec& spec, std::span<const double> x,
                          std::span<const double> y, const GeodesicOptions& opts) {
  require_finite_valued(spec);
  check_point(spec, x, "geod_upper");
  check_point(spec, y, "geod_upper");
  if (opts.M < 2) throw InvalidArgument("geod_upper: M must be >= 2");
  if (opts.reparam_every == 0) throw InvalidArgument("geod_upper: reparam_every must be >= 1");
  const std::size_t n = spec.dimension();
  const std::size_t M = opts.M;

  GeodesicResult res;
  res.method = GeodesicMethod::curve_relaxation;
  res.from.assign(x.begin(), x.end());
  res.to.assign(y.begin(), y.end());
  res.resolution = static_cast<int>(M);
  if (distance(x, y) == 0.0) {
    res.witness = Curve::constant(x, 0.0, 1.0, M);
    res.value = 0.0;
    return res;
  }

  Curve c = Curve::segment(x, y, 0.0, 1.0, M);
  if (opts.initial) {
    const Curve& init = *opts.initial;
    if (init.dimension() != n) throw InvalidArgument("geod_upper: initial curve dimension");
    if (distance(init.node(0), x) > 1e-9 || distance(init.node(init.segments()), y) > 1e-9) {
      throw InvalidArgument("geod_upper: initial curve does not join x and y");
    }
    c = arclength_reparametrize(init, M);
    std::copy(x.begin(), x.end(), c.node(0).begin());
    std::copy(y.begin(), y.end(), c.node(M).begin());
  }
  add_transverse_bump(c, x, y, opts.perturbation, opts.seed);
  c = arclength_reparametrize(c, M);

  Curve best = c;
  double best_len = geodesic_length(c, spec);
  const std::size_t total = (M + 1) * n;
  auto objective = [&](std::span<const double> z, std::span<double> g) {
    return length_objective(spec, n, z, g);
  };
  auto clamp_ends = [&](std::span<double> g) {
    std::fill(g.begin(), g.begin() + n, 0.0);
    std::fill(g.begin() + (total - n), g.end(), 0.0);
  };

  // Reparametrization jitters the length at roundoff-times-M level, so
  // convergence is judged on the best value: stop after `kPatience` cycles
  // without a relative improvement above rel_tol.
  constexpr int kPatience = 3;
  int stale = 0;
  res.converged = false;
  while (res.iterations < opts.max_iter) {
    // Stiffness/mass scaled by the current chord so the metric matches the
    // length Hessian up to a factor the BB step absorbs.
    const double chord = c.t_max() / static_cast<double>(M);
    detail::H1Metric metric(M, n, 1.0 / chord, chord);
    auto precondition = [&](std::span<const double> g, std::span<double> d) {
      metric.apply(g, d);
    };
    DescentOptions dopts;
    dopts.method = DescentMethod::barzilai_borwein;
    dopts.tol = 0.0;
    dopts.max_iter = std::min(opts.reparam_every, opts.max_iter - res.iterations);
    dopts.initial_step = 1.0;
    std::vector<double> z = c.samples();
    const DescentResult dr = minimize(z, objective, dopts, clamp_ends, precondition);
    res.iterations += std::max<std::size_t>(dr.iterations, 1);
    c = arclength_reparametrize(Curve(0.0, 1.0, n, std::move(z)), M);
    const double len = geodesic_length(c, spec);
    if (len < best_len - opts.rel_tol * best_len) {
      stale = 0;
    } else {
      ++stale;
    }
    if (len < best_len) {
      best_len = len;
      best = c;
    }
    if (dr.iterations == 0 || stale >= kPatience) {
      res.converged = true;
      break;
    }
  }
  res.value = best_len;
  res.witness = std::move(best);
  return res;
}

GridGraph::GridGraph(const PotentialSpec& spec, Box box, int resolution, int stencil_radius)
    : spec_(&spec),
      box_(std::move(box)),
      resolution_(resolution),
      stencil_radius_(stencil_radius) {
  require_finite_valued(spec);
  const std::size_t n = box_.dimension();
  if (n != spec.dimension() || box_.hi.size() != n) {
    throw InvalidArgument("GridGraph: box dimension mismatch");
  }
  if (n > 3) throw InvalidArgument("GridGraph: only N <= 3 is supported");
  if (resolution < 1) throw InvalidArgument("GridGraph: resolution must be >= 1");
  const int max_res = n == 1 ? 10000000 : (n == 2 ? 2000 : 200);
  if (resolution > max_res) {
    throw InvalidArgument("GridGraph: resolution exceeds " + std::to_string(max_res));
  }
  if (stencil_radius < 1 || stencil_radius > 4) {
    throw InvalidArgument("GridGraph: stencil radius must be in [1, 4]");
  }
  spacing_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(box_.hi[i] > box_.lo[i])) throw InvalidArgument("GridGraph: empty box");
    spacing_[i] = (box_.hi[i] - box_.lo[i]) / resolution;
  }
  node_count_ = 1;
  for (std::size_t i = 0; i < n; ++i) node_count_ *= static_cast<std::size_t>(resolution + 1);

  // Primitive offsets only: a non-primitive one duplicates a shorter chain.
  const int r = stencil_radius;
  std::vector<int> o(n, -r);
  while (true) {
    int g = 0;
    for (int v : o) g = std::gcd(g, std::abs(v));
    if (g == 1) offsets_.push_back(o);
    std::size_t i = 0;
    while (i < n && o[i] == r) o[i++] = -r;
    if (i == n) break;
    ++o[i];
  }
  const std::ptrdiff_t stride_unit = resolution + 1;
  for (const auto& off : offsets_) {
    std::ptrdiff_t shift = 0, stride = 1;
    for (std::size_t i = 0; i < n; ++i) {
      shift += off[i] * stride;
      stride *= stride_unit;
    }
    offset_shift_.push_back(shift);
  }
}

std::size_t GridGraph::nearest_node(std::span<const double> z) const {
  std::size_t idx = 0, stride = 1;
  for (std::size_t i = 0; i < dimension(); ++i) {
    const double u = std::round((z[i] - box_.lo[i]) / spacing_[i]);
    const auto k = static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(resolution_)));
    idx += k * stride;
    stride *= static_cast<std::size_t>(resolution_ + 1);
  }
  return idx;
}

Point GridGraph::node_position(std::size_t index) const {
  Point p(dimension());
  for (std::size_t i = 0; i < dimension(); ++i) {
    const std::size_t k = index % static_cast<std::size_t>(resolution_ + 1);
    index /= static_cast<std::size_t>(resolution_ + 1);
    p[i] = k == static_cast<std::size_t>(resolution_) ? box_.hi[i]
                                                      : box_.lo[i] + spacing_[i] * k;
  }
  return p;
}

std::vector<Point> GridGraph::edge_interior_points(std::size_t p, std::size_t q) const {
  const Point a = node_position(p);
  const Point b = node_position(q);
  int pieces = 1;
  for (std::size_t i = 0; i < dimension(); ++i) {
    pieces = std::max(pieces, static_cast<int>(std::lround(std::abs(b[i] - a[i]) / spacing_[i])));
  }
  std::vector<Point> out;
  for (int j = 1; j < pieces; ++j) {
    Point z(dimension());
    const double lam = static_cast<double>(j) / pieces;
    for (std::size_t i = 0; i < dimension(); ++i) z[i] = a[i] + lam * (b[i] - a[i]);
    out.push_back(std::move(z));
  }
  return out;
}

double GridGraph::edge_weight(std::size_t p, std::size_t q) const {
  if (p > q) std::swap(p, q);
  const Point a = node_position(p);
  const Point b = node_position(q);
  int pieces = 1;
  for (std::size_t i = 0; i < dimension(); ++i) {
    pieces = std::max(pieces, static_cast<int>(std::lround(std::abs(b[i] - a[i]) / spacing_[i])));
  }
  Point scratch(dimension());
  return piecewise_weight(a.data(), b.data(), pieces, scratch.data());
}

double GridGraph::piecewise_weight(const double* a, const double* b, int pieces,
                                   double* scratch) const {
  const std::size_t n = dimension();
  double len2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) len2 += (b[i] - a[i]) * (b[i] - a[i]);
  const double piece_len = std::sqrt(len2) / pieces;
  double sum = 0.0;
  for (int j = 0; j < pieces; ++j) {
    const double lam = (j + 0.5) / pieces;
    for (std::size_t i = 0; i < n; ++i) scratch[i] = a[i] + lam * (b[i] - a[i]);
    sum += std::sqrt(spec_->value(std::span<const double>(scratch, n)));
  }
  return 2.0 * sum * piece_len;
}

std::vector<double> GridGraph::dijkstra(std::size_t source, std::size_t target,
                                        std::vector<std::uint32_t>* parent) const {
  const std::size_t n = dimension();
  std::vector<double> dist(node_count_, kInfinity);
  std::vector<char> done(node_count_, 0);
  if (parent) parent->assign(node_count_, UINT32_MAX);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  const int side = resolution_ + 1;
  std::vector<int> coord(n), nb(n);
  double pu[3], pv[3], scratch[3];
  auto position = [&](const std::vector<int>& k, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = k[i] == resolution_ ? box_.hi[i] : box_.lo[i] + spacing_[i] * k[i];
    }
  };
  std::vector<int> pieces(offsets_.size(), 1);
  for (std::size_t e = 0; e < offsets_.size(); ++e) {
    for (int v : offsets_[e]) pieces[e] = std::max(pieces[e], std::abs(v));
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == target) break;
    std::size_t rest = u;
    for (std::size_t i = 0; i < n; ++i) {
      coord[i] = static_cast<int>(rest % side);
      rest /= side;
    }
    position(coord, pu);
    for (std::size_t e = 0; e < offsets_.size(); ++e) {
      const auto& off = offsets_[e];
      bool inside = true;
      for (std::size_t i = 0; i < n && inside; ++i) {
        nb[i] = coord[i] + off[i];
        inside = nb[i] >= 0 && nb[i] < side;
      }
      if (!inside) continue;
      const auto v = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(u) + offset_shift_[e]);
      if (done[v]) continue;
      position(nb, pv);
      // Evaluated from the smaller index so w(u, v) == w(v, u) bitwise.
      const double w = u < v ? piecewise_weight(pu, pv, pieces[e], scratch)
                             : piecewise_weight(pv, pu, pieces[e], scratch);
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        if (parent) (*parent)[v] = static_cast<std::uint32_t>(u);
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

std::pair<double, std::vector<std::size_t>> GridGraph::shortest_path(std::size_t source,
                                                                     std::size_t target) const {
  if (source >= node_count_ || target >= node_count_) {
    throw InvalidArgument("GridGraph: node index out of range");
  }
  std::vector<std::uint32_t> parent;
  const auto dist = dijkstra(source, target, &parent);
  std::vector<std::size_t> path{target};
  while (path.back() != source) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return {dist[target], std::move(path)};
}

std::vector<double> GridGraph::distances_from(std::size_t source) const {
  if (source >= node_count_) throw InvalidArgument("GridGraph: node index out of range");
  return dijkstra(source, node_count_, nullptr);
}

Box default_oracle_box(const std::vector<Well>& wells, double scale, double min_half_width) {
  if (wells.empty()) throw InvalidArgument("default_oracle_box: no wells");
  const std::size_t n = wells.front().location.size();
  Box b{wells.front().location, wells.front().location};
  for (const auto& w : wells) {
    for (std::size_t i = 0; i < n; ++i) {
      b.lo[i] = std::min(b.lo[i], w.location[i]);
      b.hi[i] = std::max(b.hi[i], w.location[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double c = 0.5 * (b.lo[i] + b.hi[i]);
    const double half = std::max(0.5 * (b.hi[i] - b.lo[i]), min_half_width);
    b.lo[i] = c - scale * half;
    b.hi[i] = c + scale * half;
  }
  return b;
}

GeodesicResult geod_grid_oracle(const GridGraph& graph, const PotentialSpec& spec,
                                std::span<const double> x, std::span<const double> y) {
  check_point(spec, x, "geod_grid_oracle");
  check_point(spec, y, "geod_grid_oracle");
  if (!graph.box().contains(x) || !graph.box().contains(y)) {
    throw InvalidArgument("geod_grid_oracle: endpoint outside the oracle box");
  }
  GeodesicResult res;
  res.method = GeodesicMethod::grid_oracle;
  res.box = graph.box();
  res.resolution = graph.resolution();
  res.from.assign(x.begin(), x.end());
  res.to.assign(y.begin(), y.end());
  if (distance(x, y) == 0.0) {
    res.witness = Curve::constant(x, 0.0, 1.0, 2);
    return res;
  }

  // Canonical direction: the query and its reverse do identical arithmetic.
  std::size_t sx = graph.nearest_node(x);
  std::size_t sy = graph.nearest_node(y);
  const bool swapped = sx > sy || (sx == sy && std::lexicographical_compare(
                                                    y.begin(), y.end(), x.begin(), x.end()));
  std::span<const double> a = swapped ? y : x;
  std::span<const double> b = swapped ? x : y;
  if (swapped) std::swap(sx, sy);

  auto [cost, path] = graph.shortest_path(sx, sy);
  const Point na = graph.node_position(sx);
  const Point nb = graph.node_position(sy);
  res.value = segment_length(spec, a, na) + cost + segment_length(spec, nb, b);

  std::vector<Point> pts;
  pts.emplace_back(a.begin(), a.end());
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k > 0) {
      for (auto& q : graph.edge_interior_points(path[k - 1], path[k])) pts.push_back(std::move(q));
    }
    pts.push_back(graph.node_position(path[k]));
  }
  pts.emplace_back(b.begin(), b.end());
  if (swapped) std::reverse(pts.begin(), pts.end());
  if (pts.size() >= 3) {
    std::vector<double> s;
    s.reserve(pts.size() * spec.dimension());
    for (const auto& p : pts) s.insert(s.end(), p.begin(), p.end());
    res.witness = Curve(0.0, 1.0, spec.dimension(), std::move(s));
  }
  return res;
}

GeodesicResult geod_grid_oracle(const PotentialSpec& spec, std::span<const double> x,
                                std::span<const double> y, const Box& box, int resolution,
                                int stencil_radius) {
  check_point(spec, x, "geod_grid_oracle");
  check_point(spec, y, "geod_grid_oracle");
  if (box.dimension() != spec.dimension()) {
    throw InvalidArgument("geod_grid_oracle: box dimension mismatch");
  }
  if (!box.contains(x) || !box.contains(y)) {
    throw InvalidArgument("geod_grid_oracle: endpoint outside the oracle box");
  }
  const GridGraph graph(spec, box, resolution, stencil_radius);
  return geod_grid_oracle(graph, spec, x, y);
}

NondegeneracyBound nondegeneracy_bound(const PotentialSpec& spec,
                                       const std::vector<Well>& wells, double delta,
                                       const Box& box, int resolution,
                                       double radius_fraction) {
  require_finite_valued(spec);
  const std::size_t n = spec.dimension();
  if (!(delta > 0.0)) throw InvalidArgument("nondegeneracy_bound: delta must be > 0");
  if (!(radius_fraction > 0.0 && radius_fraction <= 0.5)) {
    throw InvalidArgument("nondegeneracy_bound: radius fraction must be in (0, 1/2]");
  }
  if (resolution < 2) throw InvalidArgument("nondegeneracy_bound: resolution must be >= 2");
  if (box.dimension() != n) throw InvalidArgument("nondegeneracy_bound: box dimension mismatch");
  for (std::size_t i = 0; i < wells.size(); ++i) {
    for (std::size_t j = i + 1; j < wells.size(); ++j) {
      if (distance(wells[i].location, wells[j].location) < delta) {
        throw InvalidArgument("nondegeneracy_bound: balls of radius delta/2 around wells overlap");
      }
    }
  }
  const double radius = radius_fraction * delta;
  auto outside_balls = [&](std::span<const double> z) {
    for (const auto& w : wells) {
      if (distance(z, w.location) < radius * (1.0 - 1e-12)) return false;
    }
    return true;
  };

  double c = kInfinity;
  // Lattice samples.
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) count *= static_cast<std::size_t>(resolution + 1);
  if (count > 50000000) throw InvalidArgument("nondegeneracy_bound: resolution too large");
  Point z(n);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rest % static_cast<std::size_t>(resolution + 1);
      rest /= static_cast<std::size_t>(resolution + 1);
      z[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(k) / resolution;
    }
    if (outside_balls(z)) c = std::min(c, spec.value(z));
  }
  // Ball boundaries, where the infimum sits for potentials increasing away
  // from their wells.
  const std::size_t dirs = n == 1 ? 2 : (n == 2 ? 4096 : 16384);
  for (const auto& w : wells) {
    for (const auto& u : sphere_directions(n, dirs, 0)) {
      for (std::size_t i = 0; i < n; ++i) z[i] = w.location[i] + radius * u[i];
      if (box.contains(z) && outside_balls(z)) c = std::min(c, spec.value(z));
    }
  }
  if (!std::isfinite(c)) throw InvalidArgument("nondegeneracy_bound: box lies inside the well balls");
  return {c, delta * std::sqrt(c) / 4.0};
}

double verify_energy_geodesic_bound(const Curve& curve, const PotentialSpec& spec,
                                    const GeodesicResult& reference) {
  const auto first = curve.node(0);
  const auto last = curve.node(curve.segments());
  if (reference.from.size() != curve.dimension() || reference.to.size() != curve.dimension()) {
    throw InvalidArgument("verify_energy_geodesic_bound: reference endpoints missing");
  }
  if (distance(first, reference.from) > 1e-9 || distance(last, reference.to) > 1e-9) {
    throw InvalidArgument("verify_energy_geodesic_bound: endpoint mismatch");
  }
  return curve_energy(curve, spec).total - reference.value;
}

double total_variation_geod(const Curve& curve, const PotentialSpec& spec,
                            const std::vector<std::size_t>& partition,
                            const OracleOptions& oracle) {
  if (partition.size() < 2) throw InvalidArgument("total_variation_geod: partition needs >= 2 nodes");
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (partition[i] > curve.segments()) {
      throw InvalidArgument("total_variation_geod: partition index out of range");
    }
    if (i > 0 && partition[i] <= partition[i - 1]) {
      throw InvalidArgument("total_variation_geod: partition must be strictly increasing");
    }
    if (!oracle.box.contains(curve.node(partition[i]))) {
      throw InvalidArgument("total_variation_geod: oracle box does not contain partition points");
    }
  }
  const GridGraph graph(spec, oracle.box, oracle.resolution, oracle.stencil_radius);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
    sum += geod_grid_oracle(graph, spec, curve.node(partition[i]), curve.node(partition[i + 1])).value;
  }
  return sum;
}

}  // namespace multiwell
