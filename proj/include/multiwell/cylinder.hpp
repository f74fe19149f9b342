#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multiwell/common.hpp"
#include "multiwell/cross_section.hpp"
#include "multiwell/curve.hpp"
#include "multiwell/potential.hpp"

namespace multiwell {

enum class EndCondition { neumann_ends, clamped_to_wells };

std::string to_string(EndCondition e);
EndCondition end_condition_from_string(const std::string& s);

/// Truncated cylinder (-L, L) x omega with M1 axial nodes.
struct CylinderGrid {
  double L = 10.0;
  std::size_t M1 = 801;
  SectionGrid section;
  EndCondition end_condition = EndCondition::neumann_ends;
  /// Well values imposed on the end slices when clamped.
  Point w_minus;
  Point w_plus;

  CylinderGrid(double L, std::size_t M1, SectionGrid section,
               EndCondition end = EndCondition::neumann_ends, Point w_minus = {},
               Point w_plus = {});

  double h1() const { return 2.0 * L / static_cast<double>(M1 - 1); }
  double x1(std::size_t i) const { return -L + h1() * static_cast<double>(i); }
  /// Trapezoid weight of axial node i (1/2 at the ends, 1 inside).
  double axial_weight(std::size_t i) const { return i == 0 || i + 1 == M1 ? 0.5 : 1.0; }
  std::size_t node_count() const { return M1 * section.node_count(); }
};

/// u : (-L, L) x omega -> R^N, slice-major: value (i, j, c) at
/// ((i * section nodes) + j) * N + c.
struct CylinderField {
  CylinderGrid grid;
  std::size_t dimension;
  std::vector<double> values;

  CylinderField(CylinderGrid g, std::size_t n, std::vector<double> v);

  std::span<const double> at(std::size_t i, std::size_t j) const {
    return {values.data() + (i * grid.section.node_count() + j) * dimension, dimension};
  }
  std::span<double> at(std::size_t i, std::size_t j) {
    return {values.data() + (i * grid.section.node_count() + j) * dimension, dimension};
  }
  SectionField slice(std::size_t i) const;
};

/// Discrete E(u): axial cell differences (midpoint rule) plus, per axial
/// node with trapezoid weights, the section energy of the slice.
double cylinder_energy(const CylinderField& u, const PotentialSpec& spec);

/// The same energy assembled as sum_i w_i h1 (kinetic_i + e(slice_i)), with
/// kinetic_i the mean of the adjacent cells' ||d_1 u||^2. Equal to
/// cylinder_energy up to roundoff.
double slice_decomposition_energy(const CylinderField& u, const PotentialSpec& spec);

/// ||d_1 u||^2 over the whole cylinder (cell differences).
double axial_kinetic_energy(const CylinderField& u);

/// Max over free non-end nodes of |Delta_h u - grad W(u) / 2|.
double stationarity_residual(const CylinderField& u, const PotentialSpec& spec);

struct RelaxOptions {
  double dt = 0.1;
  std::size_t max_steps = 20000;
  /// Stop once an accepted step lowers E by less than this and the
  /// stationarity residual is below residual_tol.
  double stall = 1e-10;
  double residual_tol = 1e-5;
  double min_dt = 1e-10;
  /// Keep the x'-average of u_1 equal to this value on every slice by
  /// projecting after each step.
  std::optional<double> first_component_average;
};

struct Verdict {
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct SliceDiagnostics {
  double x1 = 0.0;
  /// L^2(omega) distance to each well.
  std::vector<double> dist_to_well;
  /// Max over the section nodes of |u - w| for each well.
  std::vector<double> sup_dist_to_well;
  Point average;
  double slice_e = 0.0;
  double kinetic = 0.0;
  std::optional<double> div_residual;
  std::optional<double> average_first_component;
};

struct RunReport {
  std::vector<double> energy_history;
  double final_energy = 0.0;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double final_dt = 0.0;
  double residual = 0.0;
  bool converged = false;
  std::string stop_reason;
  std::vector<SliceDiagnostics> slices;
  std::map<std::string, Verdict> verdicts;
  std::uint64_t seed = 0;
};

/// Semi-implicit gradient flow of E: (M + 2 dt K) u' = M (u - dt grad W(u)),
/// M the lumped mass, K the stiffness. The sparse system is factored once
/// per dt. A step that raises E is rejected and dt halved.
CylinderField relax(const CylinderField& u0, const PotentialSpec& spec,
                    const RelaxOptions& opts, RunReport& report);

/// Per axial node diagnostics. With `a`, also the x'-average of u_1 and
/// (torus section with N = d) the centred-difference divergence max |div u|.
std::vector<SliceDiagnostics> slice_diagnostics(const CylinderField& u,
                                                const PotentialSpec& spec,
                                                const std::vector<Well>& wells,
                                                std::optional<double> a = std::nullopt);

/// (1/|omega|) E(u, I x omega) - int_I |d ubar / dx1|^2 + V(ubar), over the
/// axial nodes inside [x1_lo, x1_hi]. V comes from the table (capped by W).
double jensen_check(const CylinderField& u, const PotentialSpec& spec, const VTable& V,
                    double x1_lo, double x1_hi);

/// Max over n_pairs random slice pairs (t, s) of
/// d_L2(u(t), u(s))^2 / (|t - s| ||d_1 u||^2); 0/0 counts as 0.
double holder_check(const CylinderField& u, std::size_t n_pairs, std::uint64_t seed);

struct TraceOptions {
  double trace_tol = 1e-2;
  double outer_fraction = 0.1;
  std::optional<double> a;
  double a_tol = 1e-6;
  bool divergence_free = false;
  double div_tol = 1e-6;
};

struct TraceVerdict {
  bool pass = false;
  std::size_t well_minus = 0;
  std::size_t well_plus = 0;
  double max_dist_minus = 0.0;
  double max_dist_plus = 0.0;
  double max_sup_dist_minus = 0.0;
  double max_sup_dist_plus = 0.0;
  double max_average_dev_minus = 0.0;
  double max_average_dev_plus = 0.0;
  double max_a_dev = 0.0;
  double max_div = 0.0;
  std::vector<std::string> failures;
};

/// u- / u+ are the nearest wells at x1 = -L / +L. Passes when the outer
/// slices are within trace_tol of them in L^2 and in x'-average; with `a`,
/// also |average_1 - a| <= a_tol on every slice, both wells lie on z_1 = a,
/// and (if declared divergence-free) div_residual <= div_tol.
TraceVerdict trace_convergence_verdict(const std::vector<SliceDiagnostics>& diags,
                                       const std::vector<Well>& wells,
                                       const TraceOptions& opts = {});

enum class InitialKind {
  constant_well,
  heteroclinic_extension,
  perturbed,
  two_connection_interp,
  divfree_harmonic,
};

std::string to_string(InitialKind k);
InitialKind initial_kind_from_string(const std::string& s);

struct InitialParams {
  /// constant_well.
  Point well;
  /// heteroclinic_extension and two_connection_interp (gamma2).
  std::optional<Curve> curve;
  std::optional<Curve> curve2;
  /// perturbed / divfree_harmonic: applied on top of `base`.
  std::optional<CylinderField> base;
  std::uint64_t seed = 0;
  double amplitude = 0.2;
  /// divfree_harmonic: axial Gaussian width of the stream function.
  double width = 2.0;
};

CylinderField make_constant(const CylinderGrid& grid, std::span<const double> z);
/// u(x1, x') = curve(x1), clamped to the curve's parameter range.
CylinderField make_heteroclinic_extension(const CylinderGrid& grid, const Curve& curve);
/// Adds amplitude * sum_k c_k sin(k pi (x1 + L) / 2L) psi_k(x'), k = 1..3,
/// with seeded random section fields psi_k, scaled to sup-norm amplitude.
/// Vanishes on the end slices.
CylinderField make_perturbed(const CylinderField& base, std::uint64_t seed, double amplitude);
/// (1 - chi(x')) gamma1(x1) + chi(x') gamma2(x1), chi = (1 - cos 2 pi x') / 2
/// on the torus and x' on the interval. Exploratory only.
CylinderField make_two_connection_interp(const CylinderGrid& grid, const Curve& gamma1,
                                         const Curve& gamma2);
/// Adds (D_2 psi, -D_1 psi) for psi = alpha exp(-x1^2 / 2 width^2) sin(2 pi x2),
/// with centred differences, on a 1-axis torus section with N = 2. The added
/// field is discretely divergence-free and has zero x'-average.
CylinderField make_divfree_harmonic(const CylinderField& base, double alpha, double width);

CylinderField make_initial(InitialKind kind, const CylinderGrid& grid, std::size_t n,
                           const InitialParams& params);

}  // namespace multiwell
