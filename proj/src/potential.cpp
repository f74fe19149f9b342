#include "multiwell/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace multiwell {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

void check_dimension(const PotentialSpec& spec, std::size_t n) {
  if (n != spec.dimension()) {
    std::ostringstream msg;
    msg << "potential '" << spec.name() << "' has dimension "
        << spec.dimension() << ", got a point of dimension " << n;
    throw InvalidArgument(msg.str());
  }
}

// Merges monomials with identical exponents and drops zero coefficients.
std::vector<MonomialTerm> combine_terms(const std::vector<MonomialTerm>& terms,
                                        double& offset) {
  std::map<std::vector<int>, double> acc;
  std::vector<std::vector<int>> order;
  for (const auto& t : terms) {
    const bool constant =
        std::all_of(t.exponents.begin(), t.exponents.end(),
                    [](int e) { return e == 0; });
    if (constant) {
      offset += t.coeff;
      continue;
    }
    auto [it, inserted] = acc.try_emplace(t.exponents, 0.0);
    if (inserted) order.push_back(t.exponents);
    it->second += t.coeff;
  }
  std::vector<MonomialTerm> out;
  for (const auto& e : order) {
    const double c = acc[e];
    if (c != 0.0) out.push_back({c, e});
  }
  return out;
}

// Iterates a tensor grid of `res` nodes per axis over `box`.
template <class F>
void for_each_grid_point(const Box& box, int res, F&& f) {
  const std::size_t n = box.dimension();
  std::vector<int> idx(n, 0);
  Point z(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (res - 1);
    }
    f(std::as_const(z), std::as_const(idx));
    std::size_t ax = 0;
    while (ax < n && ++idx[ax] == res) {
      idx[ax] = 0;
      ++ax;
    }
    if (ax == n) break;
  }
}

bool lex_less(const Point& a, const Point& b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) <= tol) continue;
    return a[i] < b[i];
  }
  return false;
}

}  // namespace

PotentialSpec::PotentialSpec(std::string name, std::size_t dimension,
                             std::vector<MonomialTerm> terms, double offset,
                             std::optional<Box> box_mask)
    : name_(std::move(name)),
      dimension_(dimension),
      offset_(offset),
      box_mask_(std::move(box_mask)) {
  if (dimension_ == 0) throw InvalidArgument("potential dimension must be >= 1");
  for (const auto& t : terms) {
    if (t.exponents.size() != dimension_) {
      throw InvalidArgument("monomial exponent vector has wrong length in '" +
                            name_ + "'");
    }
    for (int e : t.exponents) {
      if (e < 0) throw InvalidArgument("negative exponent in '" + name_ + "'");
      max_exponent_ = std::max(max_exponent_, e);
    }
    if (!std::isfinite(t.coeff)) {
      throw InvalidArgument("non-finite coefficient in '" + name_ + "'");
    }
  }
  if (box_mask_ && box_mask_->dimension() != dimension_) {
    throw InvalidArgument("box mask dimension mismatch in '" + name_ + "'");
  }
  terms_ = combine_terms(terms, offset_);
  validate_nonnegative();
}

void PotentialSpec::validate_nonnegative() const {
  const Box box = box_mask_ ? *box_mask_ : Box::cube(dimension_, -3.0, 3.0);
  auto check = [&](std::span<const double> z) {
    double scale = std::abs(offset_);
    for (const auto& t : terms_) {
      double m = std::abs(t.coeff);
      for (std::size_t i = 0; i < dimension_; ++i) {
        m *= ipow(std::abs(z[i]), t.exponents[i]);
      }
      scale += m;
    }
    const double w = polynomial(z);
    if (w < -1e-12 * (1.0 + scale)) {
      std::ostringstream msg;
      msg << "potential '" << name_ << "' is negative (" << w
          << ") at a validation sample";
      throw InvalidArgument(msg.str());
    }
  };
  if (dimension_ <= 3) {
    const int res = dimension_ == 1 ? 257 : (dimension_ == 2 ? 65 : 33);
    for_each_grid_point(box, res,
                        [&](const Point& z, const std::vector<int>&) { check(z); });
  } else {
    std::mt19937_64 rng(12345);
    Point z(dimension_);
    for (int k = 0; k < 20000; ++k) {
      for (std::size_t i = 0; i < dimension_; ++i) {
        std::uniform_real_distribution<double> u(box.lo[i], box.hi[i]);
        z[i] = u(rng);
      }
      check(z);
    }
  }
}

PotentialSpec PotentialSpec::ginzburg_landau() {
  // 1/2 (1 - u^2)^2 = 1/2 - u^2 + 1/2 u^4
  return PotentialSpec("gl1d", 1, {{-1.0, {2}}, {0.5, {4}}}, 0.5);
}

PotentialSpec PotentialSpec::four_well(double lambda) {
  if (!(lambda >= 1.0)) {
    throw InvalidArgument("four-well potential requires lambda >= 1");
  }
  std::ostringstream name;
  name << "fourwell:" << lambda;
  return PotentialSpec(name.str(), 2,
                       {{0.5, {4, 0}},
                        {-1.0, {2, 0}},
                        {0.5, {0, 4}},
                        {-1.0, {0, 2}},
                        {lambda, {2, 2}}},
                       0.5);
}

PotentialSpec PotentialSpec::quadratic(std::size_t dimension) {
  std::vector<MonomialTerm> terms;
  for (std::size_t i = 0; i < dimension; ++i) {
    std::vector<int> e(dimension, 0);
    e[i] = 2;
    terms.push_back({1.0, e});
  }
  return PotentialSpec("quadratic:" + std::to_string(dimension), dimension,
                       std::move(terms));
}

PotentialSpec PotentialSpec::from_name(const std::string& name) {
  if (name == "gl1d") return ginzburg_landau();
  auto parse_number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw InvalidArgument("bad numeric parameter in potential name '" + name +
                            "'");
    }
    return v;
  };
  if (name.rfind("fourwell:", 0) == 0) {
    return four_well(parse_number(name.substr(9)));
  }
  if (name.rfind("quadratic:", 0) == 0) {
    const double n = parse_number(name.substr(10));
    if (n < 1 || n != std::floor(n)) {
      throw InvalidArgument("quadratic dimension must be a positive integer");
    }
    return quadratic(static_cast<std::size_t>(n));
  }
  throw InvalidArgument("unknown built-in potential '" + name + "'");
}

double PotentialSpec::polynomial(std::span<const double> z) const {
  double s = offset_;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (std::size_t i = 0; i < dimension_; ++i) m *= ipow(z[i], t.exponents[i]);
    s += m;
  }
  return s;
}

double PotentialSpec::value(std::span<const double> z) const {
  if (box_mask_ && !box_mask_->contains(z)) return kInfinity;
  return std::max(0.0, polynomial(z));
}

void PotentialSpec::gradient(std::span<const double> z,
                             std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& t : terms_) {
    for (std::size_t i = 0; i < dimension_; ++i) {
      const int ei = t.exponents[i];
      if (ei == 0) continue;
      double m = t.coeff * ei * ipow(z[i], ei - 1);
      for (std::size_t j = 0; j < dimension_; ++j) {
        if (j != i) m *= ipow(z[j], t.exponents[j]);
      }
      out[i] += m;
    }
  }
}

PotentialSpec PotentialSpec::restrict_first(double a) const {
  if (dimension_ < 2) {
    throw InvalidArgument("restrict_first requires dimension >= 2");
  }
  std::vector<MonomialTerm> terms;
  double offset = offset_;
  for (const auto& t : terms_) {
    const double c = t.coeff * ipow(a, t.exponents[0]);
    std::vector<int> e(t.exponents.begin() + 1, t.exponents.end());
    terms.push_back({c, std::move(e)});
  }
  std::optional<Box> mask;
  if (box_mask_) {
    mask = Box{Point(box_mask_->lo.begin() + 1, box_mask_->lo.end()),
               Point(box_mask_->hi.begin() + 1, box_mask_->hi.end())};
  }
  std::ostringstream name;
  name << name_ << "|z1=" << a;
  return PotentialSpec(name.str(), dimension_ - 1, std::move(terms), offset,
                       std::move(mask));
}

double eval_potential(const PotentialSpec& spec, std::span<const double> z) {
  check_dimension(spec, z.size());
  for (double v : z) {
    if (!std::isfinite(v)) throw InvalidArgument("eval_potential: non-finite point");
  }
  return spec.value(z);
}

Point grad_potential(const PotentialSpec& spec, std::span<const double> z) {
  check_dimension(spec, z.size());
  if (spec.box_mask() && !spec.box_mask()->contains(z)) {
    throw InvalidArgument("grad_potential: point outside the box mask of '" +
                          spec.name() + "'");
  }
  Point g(z.size());
  spec.gradient(z, g);
  return g;
}

void require_finite_valued(const PotentialSpec& spec) {
  if (!spec.finite_valued()) {
    throw InvalidArgument("potential '" + spec.name() +
                          "' carries a box mask; solvers require a "
                          "finite-valued potential");
  }
}

std::vector<Point> sphere_directions(std::size_t dimension, std::size_t count,
                                     std::uint64_t seed) {
  std::vector<Point> dirs;
  if (dimension == 1) {
    dirs = {{-1.0}, {1.0}};
  } else if (dimension == 2) {
    dirs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else if (dimension == 3) {
    dirs.reserve(count);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double y = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
      const double th = golden * k;
      dirs.push_back({r * std::cos(th), y, r * std::sin(th)});
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    dirs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      Point d(dimension);
      double nn = 0.0;
      do {
        for (auto& v : d) v = g(rng);
        nn = norm(d);
      } while (nn < 1e-12);
      for (auto& v : d) v /= nn;
      dirs.push_back(std::move(d));
    }
  }
  return dirs;
}

namespace {

// Fixed-step gradient descent; the step is halved whenever it would raise W.
Point descend_to_well(const PotentialSpec& spec, Point x,
                      const WellSearchOptions& opts) {
  const std::size_t n = x.size();
  Point g(n), trial(n);
  double step = opts.initial_step;
  double w = spec.value(x);
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    spec.gradient(x, g);
    const double gnorm = norm(g);
    if (gnorm == 0.0) break;
    double moved = 0.0;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - step * g[i];
      const double wt = spec.value(trial);
      if (wt <= w) {
        moved = step * gnorm;
        x.swap(trial);
        w = wt;
        break;
      }
      step *= 0.5;
      if (step * gnorm < opts.min_step) break;
    }
    if (moved < opts.min_step) break;
  }
  return x;
}

double basin_radius(const PotentialSpec& spec, const Point& center,
                    double r_max, double tol) {
  const std::size_t n = center.size();
  const std::size_t count = n == 1 ? 2 : (n == 2 ? 64 : 256);
  const auto dirs = sphere_directions(n, count, 7);
  Point z(n);
  constexpr int kSteps = 32;
  for (int k = kSteps; k >= 1; --k) {
    const double r = r_max * k / kSteps;
    bool positive = true;
    for (const auto& d : dirs) {
      for (std::size_t i = 0; i < n; ++i) z[i] = center[i] + r * d[i];
      if (!(spec.value(z) > tol)) {
        positive = false;
        break;
      }
    }
    if (positive) return r;
  }
  return 0.0;
}

}  // namespace

std::vector<Well> find_wells(const PotentialSpec& spec, const Box& search_box,
                             int grid_resolution,
                             const WellSearchOptions& opts) {
  require_finite_valued(spec);
  const std::size_t n = spec.dimension();
  if (search_box.dimension() != n) {
    throw InvalidArgument("find_wells: search box dimension mismatch");
  }
  if (grid_resolution < 8) {
    throw InvalidArgument("find_wells: grid_resolution must be >= 8 per axis");
  }
  const double total = std::pow(static_cast<double>(grid_resolution),
                                static_cast<double>(n));
  if (total > 2e7) {
    throw InvalidArgument("find_wells: scan grid too large for this dimension");
  }

  // Values on the scan grid, then local minima over axis neighbours.
  std::vector<double> values;
  std::vector<Point> nodes;
  values.reserve(static_cast<std::size_t>(total));
  for_each_grid_point(search_box, grid_resolution,
                      [&](const Point& z, const std::vector<int>&) {
                        values.push_back(spec.value(z));
                        nodes.push_back(z);
                      });
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = 1; i < n; ++i) stride[i] = stride[i - 1] * grid_resolution;

  std::vector<Point> candidates;
  for (std::size_t k = 0; k < values.size(); ++k) {
    bool local_min = true;
    for (std::size_t ax = 0; ax < n && local_min; ++ax) {
      const std::size_t coord = (k / stride[ax]) % grid_resolution;
      if (coord > 0 && values[k - stride[ax]] < values[k]) local_min = false;
      if (coord + 1 < static_cast<std::size_t>(grid_resolution) &&
          values[k + stride[ax]] < values[k]) {
        local_min = false;
      }
    }
    if (local_min) candidates.push_back(nodes[k]);
  }

  std::vector<Well> wells;
  Point g(n);
  for (const auto& c : candidates) {
    Point x = descend_to_well(spec, c, opts);
    const double w = spec.value(x);
    if (!(w <= opts.well_tolerance)) continue;
    if (!search_box.contains(x, opts.merge_radius)) continue;
    bool merged = false;
    for (auto& existing : wells) {
      if (distance(existing.location, x) <= opts.merge_radius) {
        if (w < existing.residual) {
          existing.location = x;
          existing.residual = w;
        }
        merged = true;
        break;
      }
    }
    if (!merged) wells.push_back({x, w, 0.0});
    if (wells.size() > opts.max_wells) {
      throw NumericalError(
          "find_wells: more than max_wells candidates survive merging "
          "(finite-well hypothesis violated or scan too coarse)");
    }
  }
  std::sort(wells.begin(), wells.end(), [&](const Well& a, const Well& b) {
    return lex_less(a.location, b.location, opts.merge_radius);
  });

  double min_sep = kInfinity;
  for (std::size_t i = 0; i < wells.size(); ++i) {
    for (std::size_t j = i + 1; j < wells.size(); ++j) {
      min_sep = std::min(min_sep, distance(wells[i].location, wells[j].location));
    }
  }
  const double r_max = std::min(opts.basin_radius_max, 0.5 * min_sep);
  for (auto& w : wells) {
    w.basin_radius = basin_radius(spec, w.location, r_max, opts.well_tolerance);
  }
  return wells;
}

namespace {

double mask_boundary_minimum(const PotentialSpec& spec, int res) {
  const Box& box = *spec.box_mask();
  const std::size_t n = box.dimension();
  double m = kInfinity;
  for_each_grid_point(box, res, [&](const Point& z, const std::vector<int>& idx) {
    bool on_face = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (idx[i] == 0 || idx[i] == res - 1) on_face = true;
    }
    if (on_face) m = std::min(m, spec.value(z));
  });
  return m;
}

}  // namespace

HypothesisReport check_hypotheses(const PotentialSpec& spec,
                                  const Box& check_box, double r_check,
                                  std::optional<double> a,
                                  const HypothesisOptions& opts) {
  const std::size_t n = spec.dimension();
  if (check_box.dimension() != n) {
    throw InvalidArgument("check_hypotheses: check box dimension mismatch");
  }
  HypothesisReport rep;
  rep.check_box = check_box;
  rep.sample_resolution = opts.well_resolution;
  rep.r_check = r_check;

  std::vector<Well> wells;
  if (spec.finite_valued()) {
    wells = find_wells(spec, check_box, opts.well_resolution, opts.wells);
  } else {
    // Scan the unmasked polynomial inside the mask; +infinity never enters.
    const Box& mask = *spec.box_mask();
    Box inner = check_box;
    for (std::size_t i = 0; i < n; ++i) {
      inner.lo[i] = std::max(inner.lo[i], mask.lo[i]);
      inner.hi[i] = std::min(inner.hi[i], mask.hi[i]);
    }
    PotentialSpec unmasked(spec.name(), n, spec.terms(), spec.offset());
    wells = find_wells(unmasked, inner, opts.well_resolution, opts.wells);
  }
  rep.h1_well_count = wells.size();

  double circumradius = 0.0;
  for (const auto& w : wells) circumradius = std::max(circumradius, norm(w.location));
  if (!(r_check > circumradius)) {
    throw InvalidArgument(
        "check_hypotheses: R_check must exceed the circumradius of the wells");
  }

  const std::size_t samples =
      opts.sphere_samples > 0 ? opts.sphere_samples : (n <= 3 ? 4096 : 100000);
  if (spec.box_mask()) {
    rep.h2_infimum_at_radius = mask_boundary_minimum(spec, n == 1 ? 2 : 65);
  } else {
    double m = kInfinity;
    Point z(n);
    for (const auto& d : sphere_directions(n, samples, opts.seed)) {
      for (std::size_t i = 0; i < n; ++i) z[i] = r_check * d[i];
      m = std::min(m, spec.value(z));
    }
    rep.h2_infimum_at_radius = m;
  }
  rep.h2_holds = rep.h2_infimum_at_radius > opts.h2_threshold;

  if (a) {
    if (n < 2) throw InvalidArgument("check_hypotheses: a-slice needs N >= 2");
    require_finite_valued(spec);
    ASliceReport ar;
    ar.a = *a;
    const PotentialSpec slice = spec.restrict_first(*a);
    const Box sub{Point(check_box.lo.begin() + 1, check_box.lo.end()),
                  Point(check_box.hi.begin() + 1, check_box.hi.end())};
    for (const auto& w : find_wells(slice, sub, opts.well_resolution, opts.wells)) {
      Point full{*a};
      full.insert(full.end(), w.location.begin(), w.location.end());
      ar.wells.push_back(std::move(full));
    }
    ar.well_count = ar.wells.size();
    double m = kInfinity;
    Point z(n);
    const auto dirs = sphere_directions(n - 1, samples, opts.seed);
    for (int k = 0; k < opts.a_samples; ++k) {
      const double z1 = *a - opts.delta_a +
                        2.0 * opts.delta_a * k / std::max(1, opts.a_samples - 1);
      z[0] = z1;
      for (const auto& d : dirs) {
        for (std::size_t i = 1; i < n; ++i) z[i] = r_check * d[i - 1];
        m = std::min(m, spec.value(z));
      }
    }
    ar.liminf_sample = m;
    ar.h2a_holds = m > opts.h2_threshold;
    rep.a_slice_report = std::move(ar);
  }
  return rep;
}

PotentialSpec shift_potential_a(const PotentialSpec& spec, double a) {
  const std::size_t n = spec.dimension();
  const double k = 4.0 * std::numbers::pi * std::numbers::pi;
  std::vector<MonomialTerm> terms = spec.terms();
  std::vector<int> e2(n, 0), e1(n, 0);
  e2[0] = 2;
  e1[0] = 1;
  terms.push_back({k, e2});
  terms.push_back({-2.0 * k * a, e1});
  return PotentialSpec(spec.name() + "_a", n, std::move(terms),
                       spec.offset() + k * a * a, spec.box_mask());
}

}  // namespace multiwell
