#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multiwell/common.hpp"

namespace multiwell {

/// coeff * prod_i z_i^exponents[i]
struct MonomialTerm {
  double coeff = 0.0;
  std::vector<int> exponents;
};

/// Polynomial multi-well potential W : R^N -> R_+.
///
/// The value is a finite sum of monomials plus a constant offset. An optional
/// box mask marks the region outside of which W is +infinity; masked specs can
/// be evaluated and hypothesis-checked, but the solvers refuse them.
///
/// Construction scans a sample grid (the mask box, or [-3, 3]^N) and rejects
/// polynomials that go negative there. The object is immutable afterwards.
class PotentialSpec {
 public:
  PotentialSpec(std::string name, std::size_t dimension,
                std::vector<MonomialTerm> terms, double offset = 0.0,
                std::optional<Box> box_mask = std::nullopt);

  /// W(u) = 1/2 (1 - u^2)^2 on R, named "gl1d".
  static PotentialSpec ginzburg_landau();
  /// W = 1/2 (u1^2 - 1)^2 + 1/2 (u2^2 - 1)^2 + lambda u1^2 u2^2 - 1/2, named
  /// "fourwell:<lambda>". Non-negative with wells (0, +-1), (+-1, 0) for
  /// lambda >= 1.
  static PotentialSpec four_well(double lambda);
  /// W = |z|^2 on R^N.
  static PotentialSpec quadratic(std::size_t dimension);
  /// Built-in specs by CLI name: "gl1d", "fourwell:<lambda>", "quadratic:<N>".
  static PotentialSpec from_name(const std::string& name);

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<MonomialTerm>& terms() const { return terms_; }
  double offset() const { return offset_; }
  const std::optional<Box>& box_mask() const { return box_mask_; }
  bool finite_valued() const { return !box_mask_.has_value(); }

  /// W(z), clamped at zero against roundoff; +infinity outside the mask.
  double value(std::span<const double> z) const;
  /// Exact gradient of the monomial sum. Ignores the mask.
  void gradient(std::span<const double> z, std::span<double> out) const;
  /// Raw monomial sum without clamping or masking.
  double polynomial(std::span<const double> z) const;

  /// W(a, .) as a potential on R^{N-1}. Requires N >= 2.
  PotentialSpec restrict_first(double a) const;

 private:
  void validate_nonnegative() const;

  std::string name_;
  std::size_t dimension_;
  std::vector<MonomialTerm> terms_;
  double offset_;
  std::optional<Box> box_mask_;
  int max_exponent_ = 0;
};

/// W(z); +infinity when z lies outside the mask. Throws on dimension mismatch.
double eval_potential(const PotentialSpec& spec, std::span<const double> z);

/// grad W(z). Throws on dimension mismatch or when z is outside the mask.
Point grad_potential(const PotentialSpec& spec, std::span<const double> z);

/// Throws InvalidArgument unless the potential has no mask.
void require_finite_valued(const PotentialSpec& spec);

struct Well {
  Point location;
  double residual = 0.0;
  double basin_radius = 0.0;
};

struct WellSearchOptions {
  double well_tolerance = 1e-10;
  double merge_radius = 1e-4;
  std::size_t max_wells = 64;
  std::size_t max_iterations = 100000;
  double min_step = 1e-12;
  double initial_step = 0.25;
  double basin_radius_max = 1.0;
};

/// Grid scan for local minima, fixed-step descent polish, merge. The result is
/// sorted lexicographically (coordinates closer than merge_radius compare
/// equal and defer to the next axis).
std::vector<Well> find_wells(const PotentialSpec& spec, const Box& search_box,
                             int grid_resolution,
                             const WellSearchOptions& opts = {});

/// Unit directions on S^{N-1}: N=1 gives {-1, +1}; N=2 equispaced angles;
/// N=3 a Fibonacci lattice; N>3 normalized Gaussian samples from seed.
std::vector<Point> sphere_directions(std::size_t dimension, std::size_t count,
                                     std::uint64_t seed = 0);

struct ASliceReport {
  double a = 0.0;
  std::size_t well_count = 0;
  std::vector<Point> wells;  // full R^N coordinates (a, z')
  double liminf_sample = 0.0;
  bool h2a_holds = false;
};

struct HypothesisReport {
  std::size_t h1_well_count = 0;
  double h2_infimum_at_radius = 0.0;
  bool h2_holds = false;
  std::optional<ASliceReport> a_slice_report;
  Box check_box;
  int sample_resolution = 0;
  double r_check = 0.0;
};

struct HypothesisOptions {
  double h2_threshold = 1e-6;
  int well_resolution = 64;
  /// 0 selects the default: 4096 for N <= 3, 1e5 otherwise.
  std::size_t sphere_samples = 0;
  double delta_a = 0.1;
  int a_samples = 21;
  std::uint64_t seed = 0;
  WellSearchOptions wells;
};

HypothesisReport check_hypotheses(const PotentialSpec& spec,
                                  const Box& check_box, double r_check,
                                  std::optional<double> a = std::nullopt,
                                  const HypothesisOptions& opts = {});

/// W_a(z) = W(z) + 4 pi^2 (z_1 - a)^2, expanded into monomials.
PotentialSpec shift_potential_a(const PotentialSpec& spec, double a);

}  // namespace multiwell
