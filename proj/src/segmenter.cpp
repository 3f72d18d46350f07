#include "starcut/segmenter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "starcut/error.hpp"

namespace starcut {

namespace {

std::string describe(Point2D p) {
  std::ostringstream os;
  os << '(' << p.x << ", " << p.y << ')';
  return os.str();
}

}  // namespace

HelperPlacement place_helpers(const RayTemplate& tpl, std::span<const Point2D> helpers) {
  HelperPlacement placement;
  const int rays = tpl.ray_count();
  const double sector = 2.0 * std::numbers::pi / rays;
  for (std::size_t h = 0; h < helpers.size(); ++h) {
    const Point2D offset = helpers[h] - tpl.center();
    const double radius = std::hypot(offset.x, offset.y);
    if (!std::isfinite(radius) || radius > tpl.radius()) {
      throw input_error("helper-out-of-range", "helper " + std::to_string(h) + " at " +
                                                   describe(helpers[h]) + " lies beyond the template radius " +
                                                   std::to_string(tpl.radius()));
    }
    double theta = std::atan2(offset.y, offset.x);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    const double f = theta / sector;
    int ray = static_cast<int>(std::floor(f));
    if (f - ray > 0.5) ++ray;
    // A tie between the last ray and ray 0 also goes to the lower index.
    if (ray == rays - 1 && f - ray == 0.5) ray = 0;
    ray %= rays;
    int index = static_cast<int>(std::lround(radius / tpl.radial_step() - 1.0));
    index = std::clamp(index, 0, tpl.nodes_per_ray() - 2);

    auto same_ray = std::find_if(placement.pins.begin(), placement.pins.end(),
                                 [ray](const HelperPlacement::Pin& p) { return p.ray == ray; });
    if (same_ray != placement.pins.end()) {
      if (same_ray->index != index) {
        placement.warnings.push_back("helper " + std::to_string(h) + " replaces an earlier helper on ray " +
                                     std::to_string(ray));
      }
      placement.pins.erase(same_ray);
    }
    placement.pins.push_back({ray, index});
  }
  return placement;
}

HelperPlacement apply_helper_constraints(FlowNetwork& net, const RayTemplate& tpl,
                                         std::span<const Point2D> helpers) {
  HelperPlacement placement = place_helpers(tpl, helpers);
  for (const auto& pin : placement.pins) {
    net.add_arc(net.source(), tpl.node_id(pin.ray, pin.index), Capacity::infinite());
    net.add_arc(tpl.node_id(pin.ray, pin.index + 1), net.sink(), Capacity::infinite());
  }
  return placement;
}

std::vector<int> cut_indices(const CutResult& cut, const RayTemplate& tpl) {
  std::vector<int> result(static_cast<std::size_t>(tpl.ray_count()));
  for (int r = 0; r < tpl.ray_count(); ++r) {
    int k = -1;
    while (k + 1 < tpl.nodes_per_ray() && cut.in_source_set[tpl.node_id(r, k + 1)]) ++k;
    for (int i = k + 1; i < tpl.nodes_per_ray(); ++i) {
      if (cut.in_source_set[tpl.node_id(r, i)]) {
        throw compute_error("invalid-cut", "source side of ray " + std::to_string(r) + " is not a prefix");
      }
    }
    if (k < 0) throw compute_error("invalid-cut", "ray " + std::to_string(r) + " has an empty source side");
    result[static_cast<std::size_t>(r)] = k;
  }
  return result;
}

Polygon extract_contour(std::span<const int> cut_index, const RayTemplate& tpl) {
  if (cut_index.size() != static_cast<std::size_t>(tpl.ray_count())) {
    throw input_error("invalid-argument", "one cut index per ray expected");
  }
  std::vector<Point2D> vertices;
  vertices.reserve(cut_index.size());
  for (int r = 0; r < tpl.ray_count(); ++r) {
    const double radius = (cut_index[static_cast<std::size_t>(r)] + 1.5) * tpl.radial_step();
    vertices.push_back(tpl.center() + radius * tpl.direction(r));
  }
  return Polygon(std::move(vertices));
}

Diameters compute_diameters(std::span<const Point2D> points) {
  Diameters d;
  if (points.empty()) return d;
  d.endpoints_a = {points[0], points[0]};
  d.endpoints_b = d.endpoints_a;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double len = distance(points[i], points[j]);
      if (len > d.a) {
        d.a = len;
        d.endpoints_a = {points[i], points[j]};
      }
    }
  }
  if (d.a == 0.0) return d;

  // Caliper width across the a-direction, drawn as a chord through the midpoint of a.
  const Point2D along = (1.0 / d.a) * (d.endpoints_a.second - d.endpoints_a.first);
  const Point2D across{-along.y, along.x};
  const Point2D mid = 0.5 * (d.endpoints_a.first + d.endpoints_a.second);
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& p : points) {
    const Point2D rel = p - mid;
    const double s = rel.x * across.x + rel.y * across.y;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  d.b = hi - lo;
  d.endpoints_b = {mid + lo * across, mid + hi * across};
  return d;
}

SegmentationResult segment(const GrayImage& img, const SeedInput& input, const SegmentParams& params) {
  const auto started = std::chrono::steady_clock::now();

  RayTemplate tpl = build_template(input.seed, img, params.ray_count, params.nodes_per_ray, params.max_radius);
  const double g0 = sample_mean_gray(img, input.seed, params.rho);
  const CostProfile profile = compute_cost_profile(img, tpl, g0);
  FlowNetwork net = build_graph(profile, params.delta_r, params.edge_window);
  HelperPlacement placement = apply_helper_constraints(net, tpl, input.helpers);

  CutResult cut;
  try {
    cut = max_flow_min_cut(net);
  } catch (const Error& e) {
    if (e.reason() == "unbounded-flow") {
      throw compute_error("helper-conflict", "helper seeds demand cuts that violate the smoothness bound");
    }
    throw;
  }

  std::vector<int> cuts = cut_indices(cut, tpl);
  Polygon contour = extract_contour(cuts, tpl);
  BinaryMask mask = rasterize_polygon(contour, img.width(), img.height());
  Diameters diameters = compute_diameters(contour);

  SegmentationResult result{std::move(tpl),      std::move(cuts), std::move(contour), std::move(mask),
                            diameters,           std::nullopt,    std::nullopt,       std::move(placement.warnings),
                            0.0};
  if (auto spacing = img.spacing_mm()) {
    result.diameter_a_mm = diameters.a * *spacing;
    result.diameter_b_mm = diameters.b * *spacing;
  }
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace starcut
