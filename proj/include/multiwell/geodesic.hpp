#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multiwell/common.hpp"
#include "multiwell/curve.hpp"
#include "multiwell/potential.hpp"

namespace multiwell {

enum class GeodesicMethod { curve_relaxation, grid_oracle };

std::string to_string(GeodesicMethod m);

/// Estimate of the degenerate geodesic pseudo-distance between two points,
/// i.e. the infimal length of int 2 sqrt(W(sigma)) |sigma'| over curves.
struct GeodesicResult {
  double value = 0.0;
  std::optional<Curve> witness;
  GeodesicMethod method = GeodesicMethod::grid_oracle;
  Box box;
  int resolution = 0;
  Point from;
  Point to;
  bool converged = true;
  std::size_t iterations = 0;
};

struct GeodesicOptions {
  std::size_t M = 800;
  std::size_t reparam_every = 50;
  std::size_t max_iter = 20000;
  /// Converged once three consecutive reparametrization cycles fail to
  /// lower the best length by more than rel_tol * length.
  double rel_tol = 1e-9;
  /// Starting polyline; defaults to the straight segment.
  std::optional<Curve> initial;
  /// Transverse sinusoidal bump added to the starting polyline (N >= 2).
  double perturbation = 0.0;
  std::uint64_t seed = 0;
};

/// Curve relaxation: descends the discrete length over interior nodes and
/// reparametrizes to equal chords every reparam_every iterations. The value
/// is the length of the returned witness, an upper estimate of geod_W.
GeodesicResult geod_upper(const PotentialSpec& spec, std::span<const double> x,
                          std::span<const double> y,
                          const GeodesicOptions& opts = {});

/// Lattice over a box with `resolution` cells per axis (so doubling the
/// resolution nests the node sets). The stencil holds every primitive offset
/// in {-r..r}^N; r = 1 gives 2, 8 or 26 neighbours. An edge spanning s cells
/// along its longest axis is split into s pieces, each weighted
/// 2 sqrt(W(piece midpoint)) |piece|. Weights are evaluated on demand, so a
/// built graph is immutable and safe to query from several threads.
class GridGraph {
 public:
  GridGraph(const PotentialSpec& spec, Box box, int resolution,
            int stencil_radius = 1);

  std::size_t dimension() const { return box_.dimension(); }
  const Box& box() const { return box_; }
  int resolution() const { return resolution_; }
  int stencil_radius() const { return stencil_radius_; }
  std::size_t node_count() const { return node_count_; }

  std::size_t nearest_node(std::span<const double> z) const;
  Point node_position(std::size_t index) const;

  /// Label-setting shortest path; returns cost and node sequence source..target.
  std::pair<double, std::vector<std::size_t>> shortest_path(std::size_t source,
                                                            std::size_t target) const;
  /// Distances from `source` to every node.
  std::vector<double> distances_from(std::size_t source) const;

  /// Points of the edge p -> q at which it is split (excluding p, q).
  std::vector<Point> edge_interior_points(std::size_t p, std::size_t q) const;
  double edge_weight(std::size_t p, std::size_t q) const;

 private:
  double piecewise_weight(const double* a, const double* b, int pieces,
                          double* scratch) const;
  std::vector<double> dijkstra(std::size_t source, std::size_t target,
                               std::vector<std::uint32_t>* parent) const;

  const PotentialSpec* spec_;
  Box box_;
  int resolution_;
  int stencil_radius_;
  std::size_t node_count_;
  Point spacing_;
  std::vector<std::vector<int>> offsets_;
  std::vector<std::ptrdiff_t> offset_shift_;
};

/// Well bounding box scaled about its centre by `scale` (1.5 adds 25% of
/// the extent on each side); axes with extent below 2 * min_half_width use
/// that half width instead.
Box default_oracle_box(const std::vector<Well>& wells, double scale = 1.5,
                       double min_half_width = 0.5);

/// Shortest lattice path between the nodes nearest to x and y, plus the two
/// straight legs x -> node and node -> y, so the value is the length of an
/// actual polyline from x to y. Exactly symmetric in (x, y).
GeodesicResult geod_grid_oracle(const PotentialSpec& spec,
                                std::span<const double> x,
                                std::span<const double> y, const Box& box,
                                int resolution, int stencil_radius = 1);

GeodesicResult geod_grid_oracle(const GridGraph& graph, const PotentialSpec& spec,
                                std::span<const double> x,
                                std::span<const double> y);

struct NondegeneracyBound {
  double c_delta = 0.0;
  double bound = 0.0;
};

/// c_delta = min of W over box minus the balls B(p, radius_fraction * delta)
/// around the wells (lattice samples plus the ball boundaries), and
/// bound = delta sqrt(c_delta) / 4, a lower bound of geod_W(x, y) whenever
/// |x - y| >= delta. Throws if the balls B(p, delta/2) overlap.
NondegeneracyBound nondegeneracy_bound(const PotentialSpec& spec,
                                       const std::vector<Well>& wells,
                                       double delta, const Box& box,
                                       int resolution,
                                       double radius_fraction = 0.5);

/// E_W(curve) - reference.value. Throws if the reference endpoints differ
/// from the curve endpoints by more than 1e-9.
double verify_energy_geodesic_bound(const Curve& curve, const PotentialSpec& spec,
                                    const GeodesicResult& reference);

struct OracleOptions {
  Box box;
  int resolution = 400;
  int stencil_radius = 1;
};

/// Sum of grid-oracle distances between consecutive partition nodes.
double total_variation_geod(const Curve& curve, const PotentialSpec& spec,
                            const std::vector<std::size_t>& partition,
                            const OracleOptions& oracle);

}  // namespace multiwell
