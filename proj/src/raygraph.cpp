#include "starcut/raygraph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "starcut/error.hpp"

namespace starcut {

RayTemplate::RayTemplate(Point2D center, int ray_count, int nodes_per_ray, double radial_step)
    : center_(center), ray_count_(ray_count), nodes_per_ray_(nodes_per_ray), radial_step_(radial_step) {
  if (ray_count < 3) throw input_error("invalid-argument", "ray count must be at least 3");
  if (nodes_per_ray < 2) throw input_error("invalid-argument", "nodes per ray must be at least 2");
  if (!(radial_step > 0.0)) throw input_error("invalid-argument", "radial step must be positive");
}

double RayTemplate::angle(int ray) const {
  return 2.0 * std::numbers::pi * ray / ray_count_;
}

Point2D RayTemplate::direction(int ray) const {
  double t = angle(ray);
  return {std::cos(t), std::sin(t)};
}

Point2D RayTemplate::node_position(int ray, int index) const {
  return center_ + ((index + 1) * radial_step_) * direction(ray);
}

CostProfile::CostProfile(int ray_count, int nodes_per_ray, std::vector<double> deviations, double g0)
    : ray_count_(ray_count), nodes_per_ray_(nodes_per_ray), values_(std::move(deviations)), g0_(g0) {
  if (values_.size() != static_cast<std::size_t>(ray_count) * nodes_per_ray) {
    throw input_error("invalid-argument", "cost profile size does not match R x N");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 255.0)) throw input_error("invalid-argument", "deviation outside [0, 255]");
  }
}

RayTemplate build_template(Point2D center, const GrayImage& img, int ray_count, int nodes_per_ray,
                           double max_radius) {
  if (!std::isfinite(center.x) || !std::isfinite(center.y) || !img.contains(center)) {
    throw input_error("seed-out-of-bounds", "seed (" + std::to_string(center.x) + ", " +
                                                std::to_string(center.y) + ") outside image");
  }
  if (!(max_radius > 0.0)) throw input_error("invalid-argument", "max radius must be positive");
  if (ray_count < 3) throw input_error("invalid-argument", "ray count must be at least 3");
  if (nodes_per_ray < 2) throw input_error("invalid-argument", "nodes per ray must be at least 2");

  // The inscribed circle of the valid box bounds every ray equally.
  double room = std::min({center.x, center.y, img.width() - 1 - center.x, img.height() - 1 - center.y});
  double radius = std::min(max_radius, room);
  double step = radius / nodes_per_ray;
  if (step < 0.5) {
    throw input_error("seed-too-close-to-border",
                      "template radius " + std::to_string(radius) + " px leaves radial step below 0.5 px");
  }
  return RayTemplate(center, ray_count, nodes_per_ray, step);
}

double sample_mean_gray(const GrayImage& img, Point2D seed, double rho) {
  if (!img.contains(seed)) throw input_error("seed-out-of-bounds", "seed outside image");
  if (!(rho > 0.0)) throw input_error("invalid-argument", "rho must be positive");
  int x0 = std::max(0, static_cast<int>(std::floor(seed.x - rho)));
  int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(seed.x + rho)));
  int y0 = std::max(0, static_cast<int>(std::floor(seed.y - rho)));
  int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(seed.y + rho)));
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = x - seed.x;
      double dy = y - seed.y;
      if (dx * dx + dy * dy <= rho * rho) {
        sum += img.at(x, y);
        ++count;
      }
    }
  }
  if (count == 0) {
    return img.at(static_cast<int>(std::lround(seed.x)), static_cast<int>(std::lround(seed.y)));
  }
  return sum / static_cast<double>(count);
}

CostProfile compute_cost_profile(const GrayImage& img, const RayTemplate& tpl, double g0) {
  const int rays = tpl.ray_count();
  const int nodes = tpl.nodes_per_ray();
  std::vector<double> d(tpl.grid_node_count());
  for (int r = 0; r < rays; ++r) {
    for (int i = 0; i < nodes; ++i) {
      Point2D p = tpl.node_position(r, i);
      // cos/sin rounding may push the outermost node a hair past the border
      p.x = std::clamp(p.x, 0.0, img.width() - 1.0);
      p.y = std::clamp(p.y, 0.0, img.height() - 1.0);
      d[static_cast<std::size_t>(r) * nodes + i] = std::min(255.0, std::abs(sample_bilinear(img, p) - g0));
    }
  }
  return CostProfile(rays, nodes, std::move(d), g0);
}

std::vector<double> boundary_costs(const CostProfile& profile, int window) {
  if (window < 1) throw input_error("invalid-argument", "edge window must be at least 1");
  const int rays = profile.ray_count();
  const int nodes = profile.nodes_per_ray();
  std::vector<double> cost(static_cast<std::size_t>(rays) * nodes, 0.0);
  for (int r = 0; r < rays; ++r) {
    for (int k = 0; k + 1 < nodes; ++k) {
      double inner = 0.0;
      int inner_lo = std::max(k - window + 1, 0);
      for (int j = inner_lo; j <= k; ++j) inner += profile.at(r, j);
      inner /= (k - inner_lo + 1);
      double outer = 0.0;
      int outer_hi = std::min(k + window, nodes - 1);
      for (int j = k + 1; j <= outer_hi; ++j) outer += profile.at(r, j);
      outer /= (outer_hi - k);
      cost[static_cast<std::size_t>(r) * nodes + k] = inner - outer;
    }
  }
  return cost;
}

FlowNetwork build_graph(const CostProfile& profile, int delta_r, int window) {
  if (delta_r < 0) throw input_error("invalid-argument", "delta_r must be non-negative");
  const int rays = profile.ray_count();
  const int nodes = profile.nodes_per_ray();
  const std::size_t grid = static_cast<std::size_t>(rays) * nodes;
  const auto source = static_cast<NodeId>(grid);
  const auto sink = static_cast<NodeId>(grid + 1);
  auto id = [nodes](int r, int i) { return static_cast<NodeId>(r * nodes + i); };

  FlowNetwork net(grid + 2, source, sink);
  net.reserve(grid * 4);
  const Capacity inf = Capacity::infinite();

  for (int r = 0; r < rays; ++r) {
    for (int i = 1; i < nodes; ++i) net.add_arc(id(r, i), id(r, i - 1), inf);
  }
  for (int r = 0; r < rays; ++r) {
    const int next = (r + 1) % rays;
    const int prev = (r + rays - 1) % rays;
    for (int i = 0; i < nodes; ++i) {
      const int target = std::max(i - delta_r, 0);
      net.add_arc(id(r, i), id(next, target), inf);
      net.add_arc(id(r, i), id(prev, target), inf);
    }
  }

  const std::vector<double> cost = boundary_costs(profile, window);
  for (int r = 0; r < rays; ++r) {
    const double* c = cost.data() + static_cast<std::size_t>(r) * nodes;
    net.add_arc(source, id(r, 0), inf);
    for (int i = 1; i + 1 < nodes; ++i) {
      const double delta = c[i] - c[i - 1];
      if (delta < 0.0) {
        net.add_arc(source, id(r, i), Capacity::finite(-delta));
      } else if (delta > 0.0) {
        net.add_arc(id(r, i), sink, Capacity::finite(delta));
      }
    }
    net.add_arc(id(r, nodes - 1), sink, inf);
  }
  return net;
}

}  // namespace starcut
