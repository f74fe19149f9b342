#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "multiwell/common.hpp"
#include "multiwell/descent.hpp"
#include "multiwell/potential.hpp"

namespace multiwell {

/// Uniformly sampled path sigma : [t_min, t_max] -> R^N with M+1 nodes
/// t_k = t_min + k (t_max - t_min) / M.
class Curve {
 public:
  /// samples holds (M+1) * N values, node-major.
  Curve(double t_min, double t_max, std::size_t dimension,
        std::vector<double> samples);

  /// Straight segment from a to b.
  static Curve segment(std::span<const double> a, std::span<const double> b,
                       double t_min, double t_max, std::size_t segments);
  /// Constant curve at z.
  static Curve constant(std::span<const double> z, double t_min, double t_max,
                        std::size_t segments);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t segments() const { return segments_; }
  std::size_t nodes() const { return segments_ + 1; }
  double step() const { return (t_max_ - t_min_) / static_cast<double>(segments_); }
  double t(std::size_t k) const { return t_min_ + step() * static_cast<double>(k); }

  std::span<const double> node(std::size_t k) const {
    return {samples_.data() + k * dimension_, dimension_};
  }
  std::span<double> node(std::size_t k) {
    return {samples_.data() + k * dimension_, dimension_};
  }
  const std::vector<double>& samples() const { return samples_; }
  std::vector<double>& samples() { return samples_; }

  /// Linear interpolation at parameter t (clamped to the interval).
  Point at(double t) const;

 private:
  double t_min_;
  double t_max_;
  std::size_t dimension_;
  std::size_t segments_;
  std::vector<double> samples_;
};

/// Discrete E_W and length functional of a curve.
///
/// All three terms are evaluated per segment with the same node: the
/// difference quotient for the kinetic and length terms and the segment
/// midpoint for W. Young's inequality then holds segment by segment, so
/// total >= geodesic_length without slack beyond roundoff.
struct CurveEnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
  double geodesic_length = 0.0;
  double equipartition_defect = 0.0;
};

CurveEnergyBreakdown curve_energy(const Curve& curve, const PotentialSpec& spec);

/// Sum over segments of 2 sqrt(W(midpoint)) |sigma_{k+1} - sigma_k|.
double geodesic_length(const Curve& curve, const PotentialSpec& spec);

double equipartition_defect(const Curve& curve, const PotentialSpec& spec);

/// Resamples the polyline with M_out segments of equal chord length on
/// [0, L], L the chord length of the input. Endpoints are copied exactly.
Curve arclength_reparametrize(const Curve& curve, std::size_t m_out);

/// Max over interior nodes of |2 (s_{k-1} - 2 s_k + s_{k+1}) / h^2 - g_k| with
/// g_k = (grad W(mid_{k-1}) + grad W(mid_k)) / 2, the Euler-Lagrange residual
/// of the discrete energy. It equals (node gradient) / h.
double euler_lagrange_residual(const Curve& curve, const PotentialSpec& spec);

struct HeteroclinicOptions {
  DescentOptions descent{.method = DescentMethod::barzilai_borwein,
                         .tol = 1e-8,
                         .max_iter = 200000};
  /// Amplitude of the sinusoidal transverse bump added to the initial
  /// segment (N >= 2 only).
  double perturbation = 0.0;
  std::uint64_t seed = 0;
  /// Descend in the H^1 metric (tridiagonal kinetic operator plus
  /// metric_mass * h on the diagonal) instead of the Euclidean one.
  bool h1_preconditioner = true;
  double metric_mass = 1.0;
  double well_residual_tolerance = 1e-8;
};

struct HeteroclinicResult {
  Curve curve;
  CurveEnergyBreakdown energy;
  DescentResult descent;
  /// True when max_iter was hit before the gradient tolerance.
  bool not_converged = false;
  double el_residual = 0.0;
};

/// Minimizes the discrete E_W over curves on [-T, T] clamped to the two wells.
HeteroclinicResult minimize_heteroclinic(const PotentialSpec& spec,
                                         std::span<const double> well_a,
                                         std::span<const double> well_b,
                                         double T, std::size_t M,
                                         const HeteroclinicOptions& opts = {});

}  // namespace multiwell
