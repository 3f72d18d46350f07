#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace starcut {

using NodeId = std::uint32_t;

/// Arc capacity: a non-negative finite value or the infinite marker.
class Capacity {
 public:
  static Capacity finite(double value);
  static Capacity infinite() noexcept { return Capacity(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; +inf for the infinite marker.
  double value() const noexcept;

  friend bool operator==(const Capacity&, const Capacity&) = default;

 private:
  Capacity(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

struct Arc {
  NodeId from;
  NodeId to;
  Capacity capacity;
};

/// Directed capacitated graph with a source and a sink. Arcs may leave the source
/// and enter the sink, but never enter the source or leave the sink.
class FlowNetwork {
 public:
  FlowNetwork(std::size_t node_count, NodeId source, NodeId sink);

  std::size_t node_count() const noexcept { return node_count_; }
  NodeId source() const noexcept { return source_; }
  NodeId sink() const noexcept { return sink_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

  void add_arc(NodeId from, NodeId to, Capacity capacity);
  void reserve(std::size_t arc_count) { arcs_.reserve(arc_count); }

 private:
  std::size_t node_count_;
  NodeId source_;
  NodeId sink_;
  std::vector<Arc> arcs_;
};

struct CutResult {
  double flow_value = 0.0;
  /// Nodes reachable from the source in the optimal residual graph.
  std::vector<bool> in_source_set;
  /// Optimal flow per arc, parallel to FlowNetwork::arcs().
  std::vector<double> arc_flow;
};

/// Exact maximum flow by blocking flows on BFS level graphs (Dinic). The returned cut is the
/// residual-reachability set from the source, which is the unique minimal minimum cut.
/// Throws "unbounded-flow" if an all-infinite path joins source and sink, and
/// "internal-limit" after 10^7 augmentations.
CutResult max_flow_min_cut(const FlowNetwork& net);

}  // namespace starcut
