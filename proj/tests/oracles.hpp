#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "starcut/imaging.hpp"
#include "starcut/maxflow.hpp"

namespace oracles {

/// Random network: `inner` non-terminal nodes (ids 0..inner-1), source = inner, sink = inner+1,
/// integer capacities 0..10, each ordered pair present with probability `density`.
inline starcut::FlowNetwork random_network(std::mt19937_64& gen, int inner, double density) {
  using namespace starcut;
  const NodeId s = static_cast<NodeId>(inner), t = static_cast<NodeId>(inner + 1);
  FlowNetwork net(static_cast<std::size_t>(inner) + 2, s, t);
  std::uniform_int_distribution<int> cap(0, 10);
  std::bernoulli_distribution present(density);
  for (NodeId u = 0; u < static_cast<NodeId>(inner) + 2; ++u) {
    for (NodeId v = 0; v < static_cast<NodeId>(inner) + 2; ++v) {
      if (u == v || v == s || u == t) continue;
      if (present(gen)) net.add_arc(u, v, Capacity::finite(cap(gen)));
    }
  }
  return net;
}

/// Minimum s-t cut capacity over every subset of non-terminal nodes joining the source side.
inline double brute_force_min_cut(const starcut::FlowNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<std::size_t> inner;
  for (std::size_t v = 0; v < n; ++v)
    if (v != net.source() && v != net.sink()) inner.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> side(n);
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << inner.size()); ++subset) {
    std::fill(side.begin(), side.end(), false);
    side[net.source()] = true;
    for (std::size_t k = 0; k < inner.size(); ++k) side[inner[k]] = (subset >> k) & 1U;
    double cut = 0.0;
    for (const auto& a : net.arcs())
      if (side[a.from] && !side[a.to]) cut += a.capacity.value();
    best = std::min(best, cut);
  }
  return best;
}

/// Dice straight from the definition.
inline double dice_oracle(const starcut::BinaryMask& a, const starcut::BinaryMask& b) {
  long inter = 0, na = 0, nb = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      na += a.at(x, y);
      nb += b.at(x, y);
      inter += a.at(x, y) && b.at(x, y);
    }
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

inline std::vector<std::array<int, 2>> border_oracle(const starcut::BinaryMask& m) {
  std::vector<std::array<int, 2>> out;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      bool edge = x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1;
      edge = edge || !m.at(x - 1, y) || !m.at(x + 1, y) || !m.at(x, y - 1) || !m.at(x, y + 1);
      if (edge) out.push_back({x, y});
    }
  }
  return out;
}

/// Double-loop directed Hausdorff in both directions over border pixels.
inline double hausdorff_oracle(const starcut::BinaryMask& a, const starcut::BinaryMask& b) {
  const auto pa = border_oracle(a), pb = border_oracle(b);
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        best = std::min(best, std::hypot(double(p[0] - q[0]), double(p[1] - q[1])));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

/// Exact two-sided rank-sum p by enumerating every way to assign ranks to x.
/// p = P(|U - mean| >= |u_obs - mean|) under the permutation distribution.
inline double rank_sum_enumeration_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> all(x);
  all.insert(all.end(), y.begin(), y.end());
  const std::size_t n = all.size(), nx = x.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return all[a] < all[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<double>(i + 1);
  double obs = 0.0;
  for (std::size_t i = 0; i < nx; ++i) obs += rank[i];
  const double mean = static_cast<double>(nx) * static_cast<double>(n + 1) / 2.0;
  const double dev = std::abs(obs - mean);
  std::uint64_t hits = 0, total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != nx) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1U) s += static_cast<double>(i + 1);
    ++total;
    if (std::abs(s - mean) >= dev - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

/// ICC(2,1) absolute agreement (Shrout and Fleiss) from an ANOVA table whose error term is
/// summed from the explicit two-way residuals x_ij - row_i - col_j + grand.
inline double icc_anova(const std::vector<std::array<double, 2>>& r) {
  const std::size_t n = r.size();
  std::vector<double> row(n, 0.0);
  double col[2] = {0.0, 0.0}, grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 2; ++j) {
      row[i] += r[i][j] / 2.0;
      col[j] += r[i][j] / static_cast<double>(n);
      grand += r[i][j] / (2.0 * static_cast<double>(n));
    }
  }
  double ssr = 0.0, ssc = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) ssr += 2.0 * (row[i] - grand) * (row[i] - grand);
  for (double c : col) ssc += static_cast<double>(n) * (c - grand) * (c - grand);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = r[i][j] - row[i] - col[j] + grand;
      sse += e * e;
    }
  }
  const double dn = static_cast<double>(n);
  const double msr = ssr / (dn - 1.0), msc = ssc, mse = sse / (dn - 1.0);
  return (msr - mse) / (msr + mse + 2.0 * (msc - mse) / dn);
}

}  // namespace oracles
