#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "starcut/imaging.hpp"
#include "starcut/maxflow.hpp"
#include "starcut/raygraph.hpp"

namespace starcut {

struct SegmentParams {
  int ray_count = 60;
  int nodes_per_ray = 40;
  double max_radius = 150.0;
  /// Radius of the disk around the seed that defines the reference gray value.
  double rho = 3.0;
  /// Largest allowed cut-index difference between adjacent rays.
  int delta_r = 2;
  /// Nodes averaged on each side when scoring a boundary position.
  int edge_window = 2;
};

struct SeedInput {
  Point2D seed;
  /// Points on the lesion border, in placement order.
  std::vector<Point2D> helpers;
};

struct Diameters {
  double a = 0.0;
  std::pair<Point2D, Point2D> endpoints_a;
  double b = 0.0;
  std::pair<Point2D, Point2D> endpoints_b;
};

struct SegmentationResult {
  RayTemplate tpl;
  /// Last source-side node per ray, in [0, N-2].
  std::vector<int> cut_index;
  Polygon contour;
  BinaryMask mask;
  Diameters diameters;
  /// Set when the image carries a pixel spacing.
  std::optional<double> diameter_a_mm;
  std::optional<double> diameter_b_mm;
  std::vector<std::string> warnings;
  double elapsed_seconds = 0.0;
};

/// Result of mapping helpers onto the template.
struct HelperPlacement {
  struct Pin {
    int ray;
    int index;
  };
  std::vector<Pin> pins;
  std::vector<std::string> warnings;
};

/// Maps each helper to the nearest ray by angle (ties to the lower ray) and the nearest node
/// by radius, clamped to [0, N-2]. A later helper on an already pinned ray replaces the earlier
/// one and a warning is recorded. Throws "helper-out-of-range" for helpers beyond the template
/// radius.
HelperPlacement place_helpers(const RayTemplate& tpl, std::span<const Point2D> helpers);

/// Pins the cut of each helper's ray between nodes i and i+1 with infinite terminal arcs.
HelperPlacement apply_helper_constraints(FlowNetwork& net, const RayTemplate& tpl,
                                         std::span<const Point2D> helpers);

/// Per-ray cut index from a source-set labeling; throws if a ray's source side is not a
/// non-empty prefix.
std::vector<int> cut_indices(const CutResult& cut, const RayTemplate& tpl);

/// One vertex per ray at radius (cut + 1.5) * radial_step, halfway between the last
/// source-side node and the first sink-side node.
Polygon extract_contour(std::span<const int> cut_index, const RayTemplate& tpl);

/// Largest vertex distance (a) and the widest extent perpendicular to it (b).
Diameters compute_diameters(std::span<const Point2D> points);
inline Diameters compute_diameters(const Polygon& poly) { return compute_diameters(poly.vertices()); }

/// Seed + helpers -> contour, mask and diameters. Helper conflicts that make the cut infeasible
/// surface as "helper-conflict".
SegmentationResult segment(const GrayImage& img, const SeedInput& input,
                           const SegmentParams& params = {});

}  // namespace starcut
