#include "starcut/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "starcut/error.hpp"

namespace starcut {

Capacity Capacity::finite(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw input_error("invalid-network", "capacity must be finite and non-negative");
  }
  return Capacity(value, false);
}

double Capacity::value() const noexcept {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

FlowNetwork::FlowNetwork(std::size_t node_count, NodeId source, NodeId sink)
    : node_count_(node_count), source_(source), sink_(sink) {
  if (source >= node_count || sink >= node_count || source == sink) {
    throw input_error("invalid-network", "source and sink must be distinct existing nodes");
  }
}

void FlowNetwork::add_arc(NodeId from, NodeId to, Capacity capacity) {
  if (from >= node_count_ || to >= node_count_) {
    throw input_error("invalid-network", "arc endpoint out of range");
  }
  if (to == source_ || from == sink_) {
    throw input_error("invalid-network", "arcs may not enter the source or leave the sink");
  }
  if (from == to) throw input_error("invalid-network", "self-loop arc");
  arcs_.push_back({from, to, capacity});
}

namespace {

constexpr std::size_t kMaxAugmentations = 10'000'000;
constexpr double kInf = std::numeric_limits<double>::infinity();

class Dinic {
 public:
  explicit Dinic(const FlowNetwork& net) : net_(net), head_(net.node_count() + 1, 0) {
    const auto& arcs = net.arcs();
    double max_finite = 0.0;
    for (const auto& a : arcs) {
      if (!a.capacity.is_infinite()) max_finite = std::max(max_finite, a.capacity.value());
    }
    eps_ = 1e-12 * std::max(1.0, max_finite);

    // CSR adjacency: residual edge 2k is arc k forward, 2k+1 its reverse.
    to_.resize(2 * arcs.size());
    residual_.resize(2 * arcs.size());
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      ++head_[arcs[k].from + 1];
      ++head_[arcs[k].to + 1];
      to_[2 * k] = arcs[k].to;
      to_[2 * k + 1] = arcs[k].from;
      residual_[2 * k] = arcs[k].capacity.value();
      residual_[2 * k + 1] = 0.0;
    }
    for (std::size_t v = 0; v < net.node_count(); ++v) head_[v + 1] += head_[v];
    adj_.resize(2 * arcs.size());
    std::vector<std::size_t> fill(head_.begin(), head_.end() - 1);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      adj_[fill[arcs[k].from]++] = 2 * k;
      adj_[fill[arcs[k].to]++] = 2 * k + 1;
    }
    level_.resize(net.node_count());
    cursor_.resize(net.node_count());
  }

  CutResult run() {
    check_bounded();
    double flow = 0.0;
    std::size_t augmentations = 0;
    while (build_levels()) {
      std::copy(head_.begin(), head_.end() - 1, cursor_.begin());
      while (true) {
        double pushed = augment(net_.source(), kInf);
        if (pushed <= 0.0) break;
        flow += pushed;
        if (++augmentations > kMaxAugmentations) {
          throw compute_error("internal-limit", "max-flow exceeded 10^7 augmentations");
        }
      }
    }

    CutResult result;
    result.flow_value = flow;
    build_levels();
    result.in_source_set.resize(net_.node_count());
    for (std::size_t v = 0; v < net_.node_count(); ++v) result.in_source_set[v] = level_[v] >= 0;
    const auto& arcs = net_.arcs();
    result.arc_flow.resize(arcs.size());
    for (std::size_t k = 0; k < arcs.size(); ++k) result.arc_flow[k] = residual_[2 * k + 1];
    return result;
  }

 private:
  bool positive(std::size_t e) const { return residual_[e] > eps_; }

  void check_bounded() {
    std::vector<bool> seen(net_.node_count(), false);
    std::vector<NodeId> stack{net_.source()};
    seen[net_.source()] = true;
    const auto& arcs = net_.arcs();
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (std::size_t i = head_[v]; i < head_[v + 1]; ++i) {
        std::size_t e = adj_[i];
        if (e % 2 != 0 || !arcs[e / 2].capacity.is_infinite()) continue;
        NodeId w = to_[e];
        if (w == net_.sink()) {
          throw compute_error("unbounded-flow", "an infinite-capacity path joins source and sink");
        }
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }

  // BFS over positive residual edges; returns whether the sink is reachable.
  bool build_levels() {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<NodeId> queue;
    level_[net_.source()] = 0;
    queue.push(net_.source());
    while (!queue.empty()) {
      NodeId v = queue.front();
      queue.pop();
      for (std::size_t i = head_[v]; i < head_[v + 1]; ++i) {
        std::size_t e = adj_[i];
        NodeId w = to_[e];
        if (level_[w] < 0 && positive(e)) {
          level_[w] = level_[v] + 1;
          queue.push(w);
        }
      }
    }
    return level_[net_.sink()] >= 0;
  }

  double augment(NodeId v, double limit) {
    if (v == net_.sink()) return limit;
    for (std::size_t& i = cursor_[v]; i < head_[v + 1]; ++i) {
      std::size_t e = adj_[i];
      NodeId w = to_[e];
      if (level_[w] != level_[v] + 1 || !positive(e)) continue;
      double pushed = augment(w, std::min(limit, residual_[e]));
      if (pushed > 0.0) {
        residual_[e] -= pushed;
        residual_[e ^ 1] += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  const FlowNetwork& net_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> adj_;
  std::vector<NodeId> to_;
  std::vector<double> residual_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
  double eps_ = 0.0;
};

}  // namespace

CutResult max_flow_min_cut(const FlowNetwork& net) { return Dinic(net).run(); }

}  // namespace starcut
