#pragma once

#include <cstddef>
#include <vector>

#include "starcut/imaging.hpp"
#include "starcut/maxflow.hpp"

namespace starcut {

/// Circular template of R equiangular rays around the seed, N nodes per ray.
///
/// Node (r, i) sits at center + (i + 1) * radial_step * (cos t_r, sin t_r) with
/// t_r = 2 pi r / R. Since image y points down, increasing r walks clockwise on screen.
class RayTemplate {
 public:
  RayTemplate(Point2D center, int ray_count, int nodes_per_ray, double radial_step);

  Point2D center() const noexcept { return center_; }
  int ray_count() const noexcept { return ray_count_; }
  int nodes_per_ray() const noexcept { return nodes_per_ray_; }
  double radial_step() const noexcept { return radial_step_; }
  /// Radius of the outermost node.
  double radius() const noexcept { return radial_step_ * nodes_per_ray_; }

  double angle(int ray) const;
  Point2D direction(int ray) const;
  Point2D node_position(int ray, int index) const;

  /// Dense id of node (r, i) inside a network built from this template.
  NodeId node_id(int ray, int index) const {
    return static_cast<NodeId>(ray * nodes_per_ray_ + index);
  }
  std::size_t grid_node_count() const noexcept {
    return static_cast<std::size_t>(ray_count_) * nodes_per_ray_;
  }
  NodeId source_id() const noexcept { return static_cast<NodeId>(grid_node_count()); }
  NodeId sink_id() const noexcept { return static_cast<NodeId>(grid_node_count() + 1); }

 private:
  Point2D center_;
  int ray_count_;
  int nodes_per_ray_;
  double radial_step_;
};

/// Per-node gray deviation d(r, i) = |g(r, i) - g0|, stored ray-major.
class CostProfile {
 public:
  CostProfile(int ray_count, int nodes_per_ray, std::vector<double> deviations, double g0);

  int ray_count() const noexcept { return ray_count_; }
  int nodes_per_ray() const noexcept { return nodes_per_ray_; }
  double g0() const noexcept { return g0_; }
  double at(int ray, int index) const {
    return values_[static_cast<std::size_t>(ray) * nodes_per_ray_ + index];
  }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  int ray_count_;
  int nodes_per_ray_;
  std::vector<double> values_;
  double g0_;
};

/// Throws "seed-out-of-bounds" for a center outside the image and "seed-too-close-to-border"
/// when shrinking the radius to keep every ray inside leaves radial_step < 0.5 px.
RayTemplate build_template(Point2D center, const GrayImage& img, int ray_count, int nodes_per_ray,
                           double max_radius);

/// Mean of the pixels whose centers lie within `rho` of the seed; falls back to the
/// nearest pixel when the disk holds no pixel center.
double sample_mean_gray(const GrayImage& img, Point2D seed, double rho);

CostProfile compute_cost_profile(const GrayImage& img, const RayTemplate& tpl, double g0);

/// Cost of placing the boundary between node k and k+1 of a ray: the negated rise of the
/// deviation, comparing the mean over the `window` nodes outside against the `window`
/// nodes inside (windows truncated at the ray ends). Entry N-1 is unused and set to 0.
std::vector<double> boundary_costs(const CostProfile& profile, int window);

/// s-t network over the R*N template nodes plus source and sink.
///
///  - intra arcs (r, i) -> (r, i-1), infinite: the source side of a ray is a prefix;
///  - inter arcs (r, i) -> (r +- 1, max(i - delta_r, 0)), infinite: adjacent prefixes differ
///    by at most delta_r;
///  - terminal arcs from the adjacent differences c(i) - c(i-1) of the boundary costs,
///    i in [1, N-2]: negative binds the node to the source, positive to the sink;
///  - the first node of every ray is tied to the source and the last to the sink, so each
///    ray is cut exactly once and the boundary stays strictly inside the template.
///
/// The cut cost of a ray with prefix {0..k} is then c(k) plus a per-ray constant.
FlowNetwork build_graph(const CostProfile& profile, int delta_r, int window = 2);

}  // namespace starcut
