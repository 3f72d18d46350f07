#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "starcut/error.hpp"
#include "starcut/raygraph.hpp"
#include "starcut/segmenter.hpp"
#include "support.hpp"

using namespace starcut;

namespace {

std::string reason_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.reason();
  }
  return "";
}

bool same_ray(const RayTemplate& tpl, const Arc& a) {
  return a.from < tpl.grid_node_count() && a.to < tpl.grid_node_count() &&
         static_cast<int>(a.from) / tpl.nodes_per_ray() == static_cast<int>(a.to) / tpl.nodes_per_ray();
}

bool grid_arc(const RayTemplate& tpl, const Arc& a) {
  return a.from < tpl.grid_node_count() && a.to < tpl.grid_node_count();
}

// Capacity of the cut whose source side on ray r is the prefix {0..k[r]}.
double prefix_cut_capacity(const FlowNetwork& net, const RayTemplate& tpl, const std::vector<int>& k) {
  std::vector<bool> side(net.node_count(), false);
  side[net.source()] = true;
  for (int r = 0; r < tpl.ray_count(); ++r)
    for (int i = 0; i <= k[r]; ++i) side[tpl.node_id(r, i)] = true;
  double c = 0.0;
  for (const auto& a : net.arcs())
    if (side[a.from] && !side[a.to]) c += a.capacity.value();
  return c;
}

// Enumerates every per-ray cut vector with indices in [0, N-2] and calls fn on each.
void for_each_cut(int rays, int nodes, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> k(rays, 0);
  while (true) {
    fn(k);
    int r = 0;
    while (r < rays && ++k[r] > nodes - 2) k[r++] = 0;
    if (r == rays) return;
  }
}

CostProfile profile_of(int rays, int nodes, const std::vector<double>& per_ray) {
  std::vector<double> v;
  for (int r = 0; r < rays; ++r) v.insert(v.end(), per_ray.begin(), per_ray.end());
  return CostProfile(rays, nodes, v, 0.0);
}

}  // namespace

TEST_CASE("template geometry") {
  GrayImage img(512, 512, 0.0);
  RayTemplate tpl = build_template({100, 100}, img, 4, 10, 50);
  CHECK(tpl.grid_node_count() == 40);
  CHECK(tpl.radial_step() == 5.0);
  for (int i = 0; i < 10; ++i) {
    CHECK(tpl.node_position(0, i).x == doctest::Approx(105 + 5 * i));
    CHECK(tpl.node_position(0, i).y == doctest::Approx(100));
  }
  // Positive angles point down the image: ray 1 of 4 is straight below the seed.
  CHECK(tpl.node_position(1, 0).y == doctest::Approx(105));

  RayTemplate many = build_template({256, 256}, img, 60, 40, 150);
  for (int r = 0; r + 1 < 60; ++r) {
    CHECK(many.angle(r + 1) - many.angle(r) == doctest::Approx(2 * std::numbers::pi / 60).epsilon(1e-14));
  }
}

TEST_CASE("template shrinks near the border and stays inside") {
  GrayImage img(512, 512, 0.0);
  RayTemplate tpl = build_template({10, 300}, img, 60, 10, 50);
  CHECK(tpl.radius() < 10 * std::sqrt(2.0));
  for (int r = 0; r < 60; ++r) {
    for (int i = 0; i < 10; ++i) {
      Point2D p = tpl.node_position(r, i);
      CHECK(p.x >= -1e-9);
      CHECK(p.y >= -1e-9);
      CHECK(p.x <= 511 + 1e-9);
      CHECK(p.y <= 511 + 1e-9);
    }
  }
  CHECK(reason_of([&] { build_template({1, 300}, img, 60, 40, 150); }) == "seed-too-close-to-border");
  CHECK(reason_of([&] { build_template({-1, 300}, img, 60, 40, 150); }) == "seed-out-of-bounds");
  CHECK(reason_of([&] { build_template({511.5, 300}, img, 60, 40, 150); }) == "seed-out-of-bounds");
}

TEST_CASE("seed gray value") {
  GrayImage flat(40, 40, 37.0);
  CHECK(sample_mean_gray(flat, {13.3, 20.8}, 3) == doctest::Approx(37));

  GrayImage dot(9, 9, 0.0);
  std::vector<double> px(81, 0.0);
  px[4 * 9 + 4] = 255;
  CHECK(sample_mean_gray(GrayImage(9, 9, px), {4, 4}, 0.4) == 255);

  std::mt19937 gen(17);
  GrayImage rnd = testing_support::random_image(gen, 30, 30);
  for (int trial = 0; trial < 20; ++trial) {
    const int cx = 5 + trial, cy = 20 - trial / 2;
    double sum = 0.0;
    int count = 0;
    for (int dy = -3; dy <= 3; ++dy) {
      for (int dx = -3; dx <= 3; ++dx) {
        if (dx * dx + dy * dy <= 9) {
          sum += rnd.at(cx + dx, cy + dy);
          ++count;
        }
      }
    }
    REQUIRE(count == 29);
    CHECK(sample_mean_gray(rnd, {double(cx), double(cy)}, 3) == doctest::Approx(sum / 29).epsilon(1e-12));
  }
}

TEST_CASE("cost profile") {
  GrayImage flat(100, 100, 80.0);
  RayTemplate tpl = build_template({50, 50}, flat, 12, 10, 40);
  const CostProfile zero = compute_cost_profile(flat, tpl, 80.0);
  for (double d : zero.values()) CHECK(d == 0.0);

  std::vector<double> px(200 * 200);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x) px[y * 200 + x] = std::hypot(x - 100.0, y - 100.0) <= 30.0 ? 10.0 : 50.0;
  GrayImage disk(200, 200, px);
  RayTemplate t2 = build_template({100, 100}, disk, 24, 30, 60);
  CostProfile prof = compute_cost_profile(disk, t2, 10.0);
  for (int r = 0; r < 24; ++r) {
    for (int i = 0; i < 30; ++i) {
      const double rad = (i + 1) * t2.radial_step();
      // Bilinear blending reaches at most sqrt(2) px across the edge.
      if (rad < 30 - 1.5) CHECK(prof.at(r, i) == 0.0);
      if (rad > 30 + 1.5) CHECK(prof.at(r, i) == 40.0);
    }
  }
}

TEST_CASE("arc counts follow the construction") {
  std::mt19937 gen(3);
  std::uniform_int_distribution<int> rr(3, 12), nn(2, 15), dr(0, 4);
  std::uniform_real_distribution<double> val(0, 255);
  for (int trial = 0; trial < 60; ++trial) {
    int R = trial == 0 ? 4 : rr(gen), N = trial == 0 ? 10 : nn(gen);
    std::vector<double> v(static_cast<std::size_t>(R) * N);
    for (auto& x : v) x = val(gen);
    FlowNetwork net = build_graph(CostProfile(R, N, v, 0), dr(gen));
    RayTemplate tpl({0, 0}, R, N, 1.0);
    std::size_t intra = 0, inter = 0;
    for (const auto& a : net.arcs()) {
      if (!grid_arc(tpl, a)) continue;
      CHECK(a.capacity.is_infinite());
      (same_ray(tpl, a) ? intra : inter)++;
    }
    CHECK(net.node_count() == static_cast<std::size_t>(R * N + 2));
    CHECK(intra == static_cast<std::size_t>(R * (N - 1)));
    CHECK(inter == static_cast<std::size_t>(2 * R * N));
    for (const auto& a : net.arcs()) {
      CHECK(a.to != net.source());
      CHECK(a.from != net.sink());
    }
  }
}

TEST_CASE("terminal capacities telescope to the boundary-cost difference") {
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> val(0, 255);
  const int R = 5, N = 12;
  std::vector<double> v(R * N);
  for (auto& x : v) x = val(gen);
  CostProfile prof(R, N, v, 0);
  FlowNetwork net = build_graph(prof, 2, 2);
  std::vector<double> cost = boundary_costs(prof, 2);
  std::vector<double> balance(R, 0.0);
  for (const auto& a : net.arcs()) {
    if (a.capacity.is_infinite()) continue;
    if (a.to == net.sink()) balance[a.from / N] += a.capacity.value();
    if (a.from == net.source()) balance[a.to / N] -= a.capacity.value();
  }
  for (int r = 0; r < R; ++r) {
    CHECK(balance[r] == doctest::Approx(cost[r * N + N - 2] - cost[r * N]).epsilon(1e-12));
  }
}

TEST_CASE("step profile is cut between the flat part and the step") {
  CostProfile prof = profile_of(3, 5, {0, 0, 0, 5, 5});
  FlowNetwork net = build_graph(prof, 10);
  RayTemplate tpl({0, 0}, 3, 5, 1.0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_k;
  for_each_cut(3, 5, [&](const std::vector<int>& k) {
    double c = prefix_cut_capacity(net, tpl, k);
    if (c < best) {
      best = c;
      best_k = k;
    }
  });
  CHECK(best_k == std::vector<int>{2, 2, 2});
  CutResult cut = max_flow_min_cut(net);
  CHECK(cut.flow_value == doctest::Approx(best));
  CHECK(cut_indices(cut, tpl) == std::vector<int>{2, 2, 2});
}

TEST_CASE("zero profile yields zero flow and the innermost cut") {
  CostProfile prof(6, 8, std::vector<double>(48, 0.0), 0.0);
  CutResult cut = max_flow_min_cut(build_graph(prof, 2));
  CHECK(cut.flow_value == 0.0);
  CHECK(cut_indices(cut, RayTemplate({0, 0}, 6, 8, 1.0)) == std::vector<int>(6, 0));
}

TEST_CASE("solver minimizes the summed boundary cost under the smoothness band") {
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> val(0, 255);
  for (int trial = 0; trial < 40; ++trial) {
    const int R = 3 + trial % 2, N = 6, delta = trial % 3;
    std::vector<double> v(R * N);
    for (auto& x : v) x = val(gen);
    CostProfile prof(R, N, v, 0);
    std::vector<double> c = boundary_costs(prof, 2);
    RayTemplate tpl({0, 0}, R, N, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for_each_cut(R, N, [&](const std::vector<int>& k) {
      for (int r = 0; r < R; ++r)
        if (std::abs(k[r] - k[(r + 1) % R]) > delta) return;
      double total = 0.0;
      for (int r = 0; r < R; ++r) total += c[r * N + k[r]];
      best = std::min(best, total);
    });
    std::vector<int> got = cut_indices(max_flow_min_cut(build_graph(prof, delta)), tpl);
    double total = 0.0;
    for (int r = 0; r < R; ++r) {
      total += c[r * N + got[r]];
      CHECK(std::abs(got[r] - got[(r + 1) % R]) <= delta);
    }
    CHECK(total == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("boundary cost is the negated outward rise") {
  CostProfile prof = profile_of(3, 6, {0, 2, 4, 10, 20, 30});
  std::vector<double> c = boundary_costs(prof, 2);
  CHECK(c[0] == doctest::Approx(0 - 3.0));
  CHECK(c[2] == doctest::Approx(3.0 - 15.0));
  CHECK(c[4] == doctest::Approx(15.0 - 30.0));
  CHECK(c[5] == 0.0);
  CHECK(reason_of([&] { boundary_costs(prof, 0); }) == "invalid-argument");
}
