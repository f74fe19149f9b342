#include "multiwell/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "h1_metric.hpp"

namespace multiwell {

Curve::Curve(double t_min, double t_max, std::size_t dimension,
             std::vector<double> samples)
    : t_min_(t_min), t_max_(t_max), dimension_(dimension), samples_(std::move(samples)) {
  if (dimension_ == 0) throw InvalidArgument("curve dimension must be >= 1");
  if (!(t_min_ < t_max_)) throw InvalidArgument("curve requires t_min < t_max");
  if (samples_.size() % dimension_ != 0) {
    throw InvalidArgument("curve samples are not a multiple of the dimension");
  }
  const std::size_t n_nodes = samples_.size() / dimension_;
  if (n_nodes < 3) throw InvalidArgument("curve requires M >= 2 segments");
  segments_ = n_nodes - 1;
  for (double v : samples_) {
    if (!std::isfinite(v)) throw InvalidArgument("curve samples must be finite");
  }
}

Curve Curve::segment(std::span<const double> a, std::span<const double> b,
                     double t_min, double t_max, std::size_t segments) {
  if (a.size() != b.size()) throw InvalidArgument("segment endpoints differ in dimension");
  const std::size_t n = a.size();
  std::vector<double> s((segments + 1) * n);
  for (std::size_t k = 0; k <= segments; ++k) {
    const double lam = static_cast<double>(k) / static_cast<double>(segments);
    for (std::size_t i = 0; i < n; ++i) s[k * n + i] = (1.0 - lam) * a[i] + lam * b[i];
  }
  // Endpoints exactly.
  std::copy(a.begin(), a.end(), s.begin());
  std::copy(b.begin(), b.end(), s.end() - static_cast<std::ptrdiff_t>(n));
  return Curve(t_min, t_max, n, std::move(s));
}

Curve Curve::constant(std::span<const double> z, double t_min, double t_max,
                      std::size_t segments) {
  return segment(z, z, t_min, t_max, segments);
}

Point Curve::at(double t) const {
  const double u = std::clamp((t - t_min_) / step(), 0.0, static_cast<double>(segments_));
  std::size_t k = static_cast<std::size_t>(std::floor(u));
  if (k >= segments_) k = segments_ - 1;
  const double lam = u - static_cast<double>(k);
  Point p(dimension_);
  const auto a = node(k);
  const auto b = node(k + 1);
  for (std::size_t i = 0; i < dimension_; ++i) p[i] = (1.0 - lam) * a[i] + lam * b[i];
  return p;
}

namespace {

void check_spec(const Curve& c, const PotentialSpec& spec) {
  if (c.dimension() != spec.dimension()) {
    throw InvalidArgument("curve and potential dimensions differ");
  }
}

}  // namespace

CurveEnergyBreakdown curve_energy(const Curve& curve, const PotentialSpec& spec) {
  check_spec(curve, spec);
  const std::size_t n = curve.dimension();
  const double h = curve.step();
  CurveEnergyBreakdown e;
  Point mid(n);
  for (std::size_t k = 0; k < curve.segments(); ++k) {
    const auto a = curve.node(k);
    const auto b = curve.node(k + 1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = b[i] - a[i];
      d2 += d * d;
      mid[i] = 0.5 * (a[i] + b[i]);
    }
    const double w = spec.value(mid);
    if (!std::isfinite(w)) {
      throw InvalidArgument("curve_energy: curve leaves the potential's box mask");
    }
    e.kinetic += d2 / h;
    e.potential += h * w;
    e.geodesic_length += 2.0 * std::sqrt(w) * std::sqrt(d2);
  }
  e.total = e.kinetic + e.potential;
  e.equipartition_defect = std::abs(e.kinetic - e.potential);
  return e;
}

double geodesic_length(const Curve& curve, const PotentialSpec& spec) {
  return curve_energy(curve, spec).geodesic_length;
}

double equipartition_defect(const Curve& curve, const PotentialSpec& spec) {
  return curve_energy(curve, spec).equipartition_defect;
}

namespace {

struct PolylinePos {
  std::size_t seg;
  double tau;
};

// First point after `pos` on the polyline whose distance to p equals c.
std::optional<PolylinePos> chord_step(const std::vector<Point>& pts,
                                      std::span<const double> p, PolylinePos pos,
                                      double c) {
  const std::size_t n = p.size();
  for (std::size_t j = pos.seg; j + 1 < pts.size(); ++j) {
    const double tau0 = j == pos.seg ? pos.tau : 0.0;
    double dd = 0.0, ad = 0.0, aa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pts[j + 1][i] - pts[j][i];
      const double r = pts[j][i] - p[i];
      dd += d * d;
      ad += r * d;
      aa += r * r;
    }
    if (dd == 0.0) continue;
    const double disc = ad * ad - dd * (aa - c * c);
    if (disc < 0.0) continue;
    const double root = (-ad + std::sqrt(disc)) / dd;
    if (root >= tau0 && root <= 1.0) return PolylinePos{j, root};
  }
  return std::nullopt;
}

Point polyline_point(const std::vector<Point>& pts, PolylinePos pos) {
  const auto& a = pts[pos.seg];
  const auto& b = pts[pos.seg + 1];
  Point q(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) q[i] = a[i] + pos.tau * (b[i] - a[i]);
  return q;
}

// Walks m_out - 1 chords of length c; returns the points, or nothing if the
// walk runs off the end.
std::optional<std::vector<Point>> chord_walk(const std::vector<Point>& pts,
                                             std::size_t m_out, double c) {
  std::vector<Point> out;
  out.reserve(m_out + 1);
  out.push_back(pts.front());
  PolylinePos pos{0, 0.0};
  for (std::size_t k = 1; k < m_out; ++k) {
    auto next = chord_step(pts, out.back(), pos, c);
    if (!next) return std::nullopt;
    pos = *next;
    out.push_back(polyline_point(pts, pos));
  }
  return out;
}

}  // namespace

Curve arclength_reparametrize(const Curve& curve, std::size_t m_out) {
  if (m_out < 2) throw InvalidArgument("arclength_reparametrize: M_out must be >= 2");
  const std::size_t n = curve.dimension();
  std::vector<Point> pts;
  pts.reserve(curve.nodes());
  for (std::size_t k = 0; k < curve.nodes(); ++k) {
    const auto p = curve.node(k);
    Point q(p.begin(), p.end());
    if (!pts.empty() && q == pts.back()) continue;
    pts.push_back(std::move(q));
  }
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    cum[k] = cum[k - 1] + distance(pts[k - 1], pts[k]);
  }
  const double length = cum.back();
  if (!(length > 0.0)) {
    throw InvalidArgument("arclength_reparametrize: curve has zero length");
  }
  const auto first = curve.node(0);
  const auto last = curve.node(curve.segments());

  // Equal chords: bisection on the chord c so that the last chord also has
  // length c. At c = L / M_out the walk can use at most the full length, so
  // the residual is <= 0 there and > 0 for small c.
  auto residual = [&](double c) -> double {
    auto walk = chord_walk(pts, m_out, c);
    if (!walk) return -kInfinity;
    return distance(walk->back(), last) - c;
  };
  double lo = 0.0;
  double hi = length / static_cast<double>(m_out);
  std::optional<std::vector<Point>> best;
  if (residual(hi) <= 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-16 * length; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (residual(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    best = chord_walk(pts, m_out, lo);
  }

  std::vector<double> s((m_out + 1) * n);
  if (best && best->size() == m_out) {
    for (std::size_t k = 0; k < m_out; ++k) {
      std::copy((*best)[k].begin(), (*best)[k].end(), s.begin() + k * n);
    }
  } else {
    // Fallback: equal arc length along the polyline.
    std::size_t seg = 0;
    for (std::size_t k = 0; k < m_out; ++k) {
      const double target = length * static_cast<double>(k) / static_cast<double>(m_out);
      while (seg + 2 < pts.size() && cum[seg + 1] < target) ++seg;
      const double len = cum[seg + 1] - cum[seg];
      const double tau = len > 0.0 ? std::clamp((target - cum[seg]) / len, 0.0, 1.0) : 0.0;
      const Point q = polyline_point(pts, {seg, tau});
      std::copy(q.begin(), q.end(), s.begin() + k * n);
    }
  }
  std::copy(first.begin(), first.end(), s.begin());
  std::copy(last.begin(), last.end(), s.begin() + m_out * n);
  return Curve(0.0, length, n, std::move(s));
}

double euler_lagrange_residual(const Curve& curve, const PotentialSpec& spec) {
  check_spec(curve, spec);
  const std::size_t n = curve.dimension();
  const double h = curve.step();
  Point m0(n), m1(n), g0(n), g1(n);
  double worst = 0.0;
  for (std::size_t k = 1; k < curve.segments(); ++k) {
    const auto a = curve.node(k - 1);
    const auto b = curve.node(k);
    const auto c = curve.node(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      m0[i] = 0.5 * (a[i] + b[i]);
      m1[i] = 0.5 * (b[i] + c[i]);
    }
    spec.gradient(m0, g0);
    spec.gradient(m1, g1);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = 2.0 * (a[i] - 2.0 * b[i] + c[i]) / (h * h) - 0.5 * (g0[i] + g1[i]);
      r2 += r * r;
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  return worst;
}

namespace {

// Discrete E_W over the full sample vector; gradient entries of the clamped
// endpoints are computed but projected away by the caller.
double curve_objective(const PotentialSpec& spec, std::size_t n, double h,
                       std::span<const double> x, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t segs = x.size() / n - 1;
  double e = 0.0;
  double mid[8];
  double gw[8];
  std::vector<double> mid_v, gw_v;
  double* m = mid;
  double* g = gw;
  if (n > 8) {
    mid_v.resize(n);
    gw_v.resize(n);
    m = mid_v.data();
    g = gw_v.data();
  }
  for (std::size_t k = 0; k < segs; ++k) {
    const double* a = x.data() + k * n;
    const double* b = a + n;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = b[i] - a[i];
      d2 += d * d;
      m[i] = 0.5 * (a[i] + b[i]);
    }
    const std::span<const double> ms(m, n);
    e += d2 / h + h * spec.value(ms);
    spec.gradient(ms, std::span<double>(g, n));
    double* ga = grad.data() + k * n;
    double* gb = ga + n;
    for (std::size_t i = 0; i < n; ++i) {
      const double kin = 2.0 * (b[i] - a[i]) / h;
      ga[i] += -kin + 0.5 * h * g[i];
      gb[i] += kin + 0.5 * h * g[i];
    }
  }
  return e;
}

}  // namespace

HeteroclinicResult minimize_heteroclinic(const PotentialSpec& spec,
                                         std::span<const double> well_a,
                                         std::span<const double> well_b,
                                         double T, std::size_t M,
                                         const HeteroclinicOptions& opts) {
  require_finite_valued(spec);
  const std::size_t n = spec.dimension();
  if (well_a.size() != n || well_b.size() != n) {
    throw InvalidArgument("minimize_heteroclinic: endpoint dimension mismatch");
  }
  if (!(T >= 5.0)) throw InvalidArgument("minimize_heteroclinic: T must be >= 5");
  if (M < 100) throw InvalidArgument("minimize_heteroclinic: M must be >= 100");
  if (spec.value(well_a) > opts.well_residual_tolerance ||
      spec.value(well_b) > opts.well_residual_tolerance) {
    throw InvalidArgument("minimize_heteroclinic: endpoints are not wells");
  }

  Curve c = Curve::segment(well_a, well_b, -T, T, M);
  if (opts.perturbation != 0.0 && n >= 2) {
    // Transverse sinusoidal bump, direction drawn from the seed.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    Point dir(n);
    Point axis(n);
    for (std::size_t i = 0; i < n; ++i) axis[i] = well_b[i] - well_a[i];
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
    for (auto& v : dir) v /= dn;
    for (std::size_t k = 1; k < M; ++k) {
      const double bump = std::sin(std::numbers::pi * static_cast<double>(k) / M);
      auto p = c.node(k);
      for (std::size_t i = 0; i < n; ++i) p[i] += opts.perturbation * bump * dir[i];
    }
  }

  const double h = c.step();
  std::vector<double> x = c.samples();
  const std::size_t total = x.size();
  auto objective = [&](std::span<const double> z, std::span<double> g) {
    return curve_objective(spec, n, h, z, g);
  };
  auto clamp_ends = [&](std::span<double> g) {
    std::fill(g.begin(), g.begin() + n, 0.0);
    std::fill(g.begin() + (total - n), g.end(), 0.0);
  };

  HeteroclinicResult res{c, {}, {}, false, 0.0};
  if (distance(well_a, well_b) == 0.0) {
    res.energy = curve_energy(c, spec);
    res.descent.converged = true;
    return res;
  }
  // H^1 metric: P = (2/h) tridiag(-1, 2, -1) + h I on interior nodes.
  detail::H1Metric metric(M, n, 2.0 / h, h * opts.metric_mass);
  auto h1_metric = [&](std::span<const double> g, std::span<double> d) {
    metric.apply(g, d);
  };
  DescentOptions dopts = opts.descent;
  if (opts.h1_preconditioner) {
    if (dopts.initial_step == DescentOptions{}.initial_step) dopts.initial_step = 1.0;
    res.descent = minimize(x, objective, dopts, clamp_ends, h1_metric);
  } else {
    res.descent = minimize(x, objective, dopts, clamp_ends);
  }
  res.curve = Curve(-T, T, n, std::move(x));
  res.energy = curve_energy(res.curve, spec);
  res.not_converged = !res.descent.converged;
  res.el_residual = euler_lagrange_residual(res.curve, spec);
  return res;
}

}  // namespace multiwell
