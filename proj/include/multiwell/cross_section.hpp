#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "multiwell/common.hpp"
#include "multiwell/potential.hpp"

namespace multiwell {

enum class SectionKind {
  /// omega = (0, 1) with P nodes at j / (P - 1); Neumann ends.
  interval_neumann,
  /// omega = T^k, k in {1, 2}, with P nodes per axis at j / P.
  torus,
};

std::string to_string(SectionKind k);
SectionKind section_kind_from_string(const std::string& s);

/// Cross-section grid with |omega| = 1.
///
/// Gradient terms are cell differences: each difference pair (a, b) along an
/// axis contributes difference_weight() * |v_b - v_a|^2, which is the
/// midpoint rule for the integral of |d v|^2. Potential terms use the node
/// weights: trapezoid on the interval, uniform on the torus.
class SectionGrid {
 public:
  static SectionGrid interval(int points);
  static SectionGrid torus(int points, int axes = 1);

  SectionKind kind() const { return kind_; }
  int points_per_axis() const { return points_; }
  /// Dimension of omega (d - 1).
  int axes() const { return axes_; }
  std::size_t node_count() const { return weights_.size(); }
  double spacing() const { return spacing_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& differences() const {
    return differences_;
  }
  /// Axis (0-based) of each difference pair.
  const std::vector<std::uint8_t>& difference_axis() const { return difference_axis_; }
  double difference_weight() const { return difference_weight_; }
  /// Coordinates x' of node j.
  std::vector<double> coordinates(std::size_t j) const;

  bool operator==(const SectionGrid& o) const {
    return kind_ == o.kind_ && points_ == o.points_ && axes_ == o.axes_;
  }

 private:
  SectionGrid(SectionKind kind, int points, int axes);

  SectionKind kind_;
  int points_;
  int axes_;
  double spacing_;
  std::vector<double> weights_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> differences_;
  std::vector<std::uint8_t> difference_axis_;
  double difference_weight_;
};

/// v : omega -> R^N sampled at the section nodes (node-major).
struct SectionField {
  SectionGrid grid;
  std::size_t dimension;
  std::vector<double> values;

  SectionField(SectionGrid g, std::size_t n, std::vector<double> v);
  static SectionField constant(const SectionGrid& g, std::span<const double> z);

  std::span<const double> node(std::size_t j) const {
    return {values.data() + j * dimension, dimension};
  }
  std::span<double> node(std::size_t j) { return {values.data() + j * dimension, dimension}; }
  /// Weighted x'-average.
  Point mean() const;
};

struct SectionEnergyParts {
  double gradient = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

SectionEnergyParts section_energy_parts(const SectionField& v, const PotentialSpec& spec);

/// Slice energy e(v): average over omega of |grad' v|^2 + W(v).
double section_energy(const SectionField& v, const PotentialSpec& spec);

/// e(v) when the first component has mean a (within 1e-8), +infinity
/// otherwise. Requires the torus section and N = d.
double section_energy_a(const SectionField& v, const PotentialSpec& spec, double a);

/// (average of |v - z|^2)^{1/2}.
double l2_distance(const SectionField& v, std::span<const double> z);
/// Distance to the nearest of the constant fields at `wells`, and its index.
std::pair<double, std::size_t> l2_distance_to_wells(const SectionField& v,
                                                    const std::vector<Point>& wells);

/// Zero-mean random field: a few low Fourier modes per component with
/// Gaussian coefficients, scaled to L^2 norm `amplitude`.
SectionField random_smooth_field(const SectionGrid& grid, std::size_t n,
                                 std::mt19937_64& rng, double amplitude);

struct AveragedPotentialOptions {
  int n_restarts = 3;
  std::uint64_t seed = 0;
  double restart_amplitude = 0.5;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
};

struct AveragedPotentialResult {
  Point z;
  /// Best value found: an upper estimate of V(z).
  double value = 0.0;
  SectionField minimizer;
  double constant_candidate_value = 0.0;
  std::size_t iterations = 0;
  /// Gradient tolerance met, or the best start stalled at roundoff level.
  bool converged = false;
};

/// Minimizes e over fields with mean z: from the constant field and from
/// n_restarts random perturbations of it, by projected descent.
AveragedPotentialResult averaged_potential(const PotentialSpec& spec,
                                           std::span<const double> z,
                                           const SectionGrid& grid,
                                           const AveragedPotentialOptions& opts = {});

struct VPropsRow {
  Point z;
  double V = 0.0;
  double W = 0.0;
  bool upper_bound_ok = false;
  bool zero_set_ok = false;
};

struct VPropsReport {
  std::vector<VPropsRow> rows;
  bool upper_bound_holds = true;
  bool zero_set_equality_holds = true;
  /// Minimum of sampled V on the sphere of radius r_check: a proxy for the
  /// liminf of V at infinity, not a certificate.
  double v_infinity_proxy = 0.0;
  bool v_infinity_positive = false;
  double r_check = 0.0;
  /// Lower semicontinuity is not checkable from samples.
  bool lsc_checked = false;
};

struct VPropsOptions {
  AveragedPotentialOptions averaged;
  double zero_threshold = 1e-6;
  double upper_slack = 1e-9;
  double r_check = 3.0;
  std::size_t sphere_samples = 16;
};

VPropsReport verify_V_props(const PotentialSpec& spec, const std::vector<Well>& wells,
                            const std::vector<Point>& sample_points,
                            const SectionGrid& grid, const VPropsOptions& opts = {});

/// Lattice of averaged-potential values over a box, for evaluating V at
/// arbitrary points by multilinear interpolation capped by W.
class VTable {
 public:
  /// Builds the table with `resolution` cells per axis; nodes are computed on
  /// up to `jobs` threads, each from its own seed, so the result does not
  /// depend on the thread count.
  static VTable build(const PotentialSpec& spec, const SectionGrid& grid, Box box,
                      int resolution, const AveragedPotentialOptions& opts = {},
                      int jobs = 1);

  const Box& box() const { return box_; }
  int resolution() const { return resolution_; }
  const std::vector<double>& values() const { return values_; }
  bool covers(std::span<const double> z) const { return box_.contains(z, 1e-12); }
  /// min(interpolated table value, W(z)); throws outside the box.
  double operator()(const PotentialSpec& spec, std::span<const double> z) const;

 private:
  Box box_;
  int resolution_ = 0;
  std::vector<double> values_;
};

enum class KEpsFlavor { plain, mean_constrained_a };

std::string to_string(KEpsFlavor f);

struct KEpsOptions {
  int penalty_rounds = 6;
  double mu0 = 10.0;
  double mu_factor = 10.0;
  /// Constant starts along this many directions per well (N = 1: both signs).
  std::size_t direction_count = 4;
  /// Smooth random starts per well.
  int n_random_starts = 3;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::size_t max_iter_per_round = 20000;
};

struct KEpsResult {
  double epsilon = 0.0;
  /// Lowest e (or e_a) found among feasible fields: an upper estimate of k_eps.
  double value = 0.0;
  SectionField witness;
  double constrained_distance = 0.0;
  KEpsFlavor flavor = KEpsFlavor::plain;
  std::optional<double> a;
  /// The distance constraint is active at the witness (d <= eps (1 + 1e-3)).
  bool active = false;
};

/// Wells of W(a, .) among `wells`: those with |w_1 - a| <= 1e-6.
std::vector<Point> wells_on_slice(const std::vector<Well>& wells, double a);

/// Penalty minimization of e(v) (or e_a) subject to d(v, Sigma) >= eps, where
/// Sigma is the well set (or its slice z_1 = a). `warm_starts` are tried in
/// addition to the well-based starts.
KEpsResult k_epsilon(const PotentialSpec& spec, const SectionGrid& grid, double eps,
                     const std::vector<Well>& wells, KEpsFlavor flavor,
                     std::optional<double> a, const KEpsOptions& opts = {},
                     const std::vector<SectionField>& warm_starts = {});

/// k_epsilon over a list of eps values, solved from the largest down with
/// each witness offered to the smaller values. Results follow input order.
std::vector<KEpsResult> k_epsilon_ladder(const PotentialSpec& spec,
                                         const SectionGrid& grid,
                                         const std::vector<double>& eps_values,
                                         const std::vector<Well>& wells,
                                         KEpsFlavor flavor, std::optional<double> a,
                                         const KEpsOptions& opts = {});

}  // namespace multiwell
