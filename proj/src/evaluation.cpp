#include "starcut/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "starcut/error.hpp"
#include "starcut/rng.hpp"

namespace starcut {

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw input_error("dimension-mismatch", "masks are " + std::to_string(a.width()) + "x" +
                                                std::to_string(a.height()) + " and " + std::to_string(b.width()) +
                                                "x" + std::to_string(b.height()));
  }
}

// Exact 1-D squared distance transform (lower envelope of parabolas).
void distance_transform_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    while (k >= 0) {
      const double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -inf : ((f[q] + double(q) * q) - (f[v[k - 1]] + double(v[k - 1]) * v[k - 1])) /
                                (2.0 * q - 2.0 * v[k - 1]);
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(out, out + n, inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

// Squared Euclidean distance from every pixel to the nearest marked pixel.
std::vector<double> squared_distance_map(const std::vector<std::array<int, 2>>& marked, int width, int height) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<std::size_t>(width) * height, inf);
  for (const auto& p : marked) grid[static_cast<std::size_t>(p[1]) * width + p[0]] = 0.0;
  const int longest = std::max(width, height);
  std::vector<int> v(longest);
  std::vector<double> z(longest + 1);
  std::vector<double> in(longest);
  std::vector<double> out(longest);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) in[y] = grid[static_cast<std::size_t>(y) * width + x];
    distance_transform_1d(in.data(), out.data(), height, v, z);
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = out[y];
  }
  for (int y = 0; y < height; ++y) {
    double* row = grid.data() + static_cast<std::size_t>(y) * width;
    std::copy(row, row + width, in.begin());
    distance_transform_1d(in.data(), row, width, v, z);
  }
  return grid;
}

double directed_hausdorff(const std::vector<std::array<int, 2>>& from, const std::vector<double>& to_map,
                          int width) {
  double worst = 0.0;
  for (const auto& p : from) worst = std::max(worst, to_map[static_cast<std::size_t>(p[1]) * width + p[0]]);
  return std::sqrt(worst);
}

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return lower + 0.5 * (upper - lower);
}

std::vector<double> midranks(std::span<const double> pooled, double& tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> rank(n);
  tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return rank;
}

// counts[u] = number of arrangements of m x-values and n y-values with U_x = u.
std::vector<double> rank_sum_counts(int m, int n) {
  // table[i][j] holds the distribution for i x's and j y's.
  std::vector<std::vector<std::vector<double>>> table(
      static_cast<std::size_t>(m + 1), std::vector<std::vector<double>>(static_cast<std::size_t>(n + 1)));
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      auto& cell = table[i][j];
      cell.assign(static_cast<std::size_t>(i * j + 1), 0.0);
      if (i == 0 || j == 0) {
        cell[0] = 1.0;
        continue;
      }
      // the largest pooled value is either an x (beats all j y's) or a y
      const auto& with_x = table[i - 1][j];
      for (std::size_t u = 0; u < with_x.size(); ++u) cell[u + j] += with_x[u];
      const auto& with_y = table[i][j - 1];
      for (std::size_t u = 0; u < with_y.size(); ++u) cell[u] += with_y[u];
    }
  }
  return table[m][n];
}

}  // namespace

double dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  std::size_t both = 0;
  std::size_t total = 0;
  const auto bits_a = a.bits();
  const auto bits_b = b.bits();
  for (std::size_t i = 0; i < bits_a.size(); ++i) {
    both += bits_a[i] & bits_b[i];
    total += bits_a[i] + bits_b[i];
  }
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(total);
}

std::vector<std::array<int, 2>> boundary_pixels(const BinaryMask& mask) {
  std::vector<std::array<int, 2>> out;
  const int w = mask.width();
  const int h = mask.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      if (edge || !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1)) {
        out.push_back({x, y});
      }
    }
  }
  return out;
}

double hausdorff(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  const auto edge_a = boundary_pixels(a);
  const auto edge_b = boundary_pixels(b);
  if (edge_a.empty() || edge_b.empty()) {
    throw input_error("undefined-distance", "Hausdorff distance is undefined for an empty mask");
  }
  const auto map_a = squared_distance_map(edge_a, a.width(), a.height());
  const auto map_b = squared_distance_map(edge_b, b.width(), b.height());
  return std::max(directed_hausdorff(edge_a, map_b, a.width()), directed_hausdorff(edge_b, map_a, a.width()));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw input_error("empty-input", "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> samples, std::uint64_t seed, int resamples) {
  if (samples.empty()) throw input_error("empty-input", "cannot summarize an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.n = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.ci_low = s.ci_high = s.median;
  if (s.n < 2 || resamples < 1) return s;

  Rng rng(seed);
  std::vector<double> medians(static_cast<std::size_t>(resamples));
  std::vector<double> draw(s.n);
  for (auto& m : medians) {
    for (auto& v : draw) v = sorted[rng.index(s.n)];
    m = median_of(draw);
  }
  std::sort(medians.begin(), medians.end());
  s.ci_low = std::min(quantile_sorted(medians, 0.025), s.median);
  s.ci_high = std::max(quantile_sorted(medians, 0.975), s.median);
  return s;
}

RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw input_error("empty-input", "rank-sum test needs two non-empty samples");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  double tie_term = 0.0;
  const auto rank = midranks(pooled, tie_term);
  const auto m = static_cast<double>(x.size());
  const auto n = static_cast<double>(y.size());
  const double rank_sum_x = std::accumulate(rank.begin(), rank.begin() + static_cast<long>(x.size()), 0.0);

  RankSumResult result;
  result.u = rank_sum_x - m * (m + 1.0) / 2.0;

  if (x.size() + y.size() <= 12 && tie_term == 0.0) {
    const auto counts = rank_sum_counts(static_cast<int>(x.size()), static_cast<int>(y.size()));
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u = static_cast<std::size_t>(std::lround(result.u));
    const double lower = std::accumulate(counts.begin(), counts.begin() + static_cast<long>(u) + 1, 0.0);
    const double upper = std::accumulate(counts.begin() + static_cast<long>(u), counts.end(), 0.0);
    result.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    result.exact = true;
    return result;
  }

  const double total_n = m + n;
  const double mean = m * n / 2.0;
  const double variance = m * n / 12.0 * ((total_n + 1.0) - tie_term / (total_n * (total_n - 1.0)));
  if (variance <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double z = std::max(0.0, std::abs(result.u - mean) - 0.5) / std::sqrt(variance);
  result.p = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
  return result;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0) || x < 0.0 || x > 1.0) {
    throw input_error("invalid-argument", "incomplete beta needs a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  // The continued fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise.
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);

  constexpr double tiny = 1e-300;
  constexpr double tolerance = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 10000; ++m) {
    const double two_m = 2.0 * m;
    double numerator = m * (b - m) * x / ((a + two_m - 1.0) * (a + two_m));
    d = 1.0 + numerator * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + numerator / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    f *= d * c;
    numerator = -(a + m) * (a + b + m) * x / ((a + two_m) * (a + two_m + 1.0));
    d = 1.0 + numerator * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + numerator / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double step = d * c;
    f *= step;
    if (std::abs(step - 1.0) < tolerance) break;
  }
  return std::exp(log_front) * f / a;
}

double students_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw input_error("invalid-argument", "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult one_sample_ttest(std::span<const double> diffs, double mu0) {
  if (diffs.size() < 2) throw input_error("degenerate-sample", "t-test needs at least two values");
  const auto n = static_cast<double>(diffs.size());
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : diffs) ss += (v - mean) * (v - mean);
  const double variance = ss / (n - 1.0);
  if (!(variance > 0.0)) throw input_error("degenerate-sample", "t-test sample has zero variance");
  TTestResult r;
  r.df = static_cast<int>(diffs.size()) - 1;
  r.t = (mean - mu0) / std::sqrt(variance / n);
  r.p = students_t_two_sided_p(r.t, r.df);
  return r;
}

double icc_absolute_agreement(std::span<const std::array<double, 2>> ratings) {
  if (ratings.size() < 3) throw input_error("too-few-subjects", "ICC needs at least 3 subjects");
  const auto n = static_cast<double>(ratings.size());
  constexpr double k = 2.0;
  double grand = 0.0;
  std::array<double, 2> column{0.0, 0.0};
  for (const auto& row : ratings) {
    column[0] += row[0];
    column[1] += row[1];
  }
  grand = (column[0] + column[1]) / (n * k);
  column[0] /= n;
  column[1] /= n;

  double ss_rows = 0.0;
  double ss_total = 0.0;
  for (const auto& row : ratings) {
    const double mean = 0.5 * (row[0] + row[1]);
    ss_rows += k * (mean - grand) * (mean - grand);
    ss_total += (row[0] - grand) * (row[0] - grand) + (row[1] - grand) * (row[1] - grand);
  }
  const double ss_cols = n * ((column[0] - grand) * (column[0] - grand) + (column[1] - grand) * (column[1] - grand));
  const double ss_error = std::max(0.0, ss_total - ss_rows - ss_cols);

  const double ms_rows = ss_rows / (n - 1.0);
  const double ms_cols = ss_cols / (k - 1.0);
  const double ms_error = ss_error / ((n - 1.0) * (k - 1.0));
  const double denominator = ms_rows + (k - 1.0) * ms_error + k * (ms_cols - ms_error) / n;
  if (ss_total == 0.0 || denominator == 0.0) return 1.0;
  return (ms_rows - ms_error) / denominator;
}

}  // namespace starcut
