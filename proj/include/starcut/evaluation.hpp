#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "starcut/imaging.hpp"

namespace starcut {

/// One lesion's manual vs semiautomatic comparison.
struct EvalRecord {
  std::string lesion_id;
  double dsc = 0.0;
  double hd = 0.0;
  double diam_a_diff = 0.0;
  double diam_b_diff = 0.0;
  double time_manual = 0.0;
  double time_semi = 0.0;
  bool satisfied = false;
};

struct SummaryStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

struct RankSumResult {
  /// Mann-Whitney U of the first sample: rank sum of x minus n_x (n_x + 1) / 2.
  double u = 0.0;
  double p = 1.0;
  bool exact = false;
};

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int df = 0;
};

/// 2|A n B| / (|A| + |B|); two empty masks agree perfectly and score 1.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Foreground pixels with a background 4-neighbor or lying on the image edge.
std::vector<std::array<int, 2>> boundary_pixels(const BinaryMask& mask);

/// Symmetric Euclidean Hausdorff distance between the boundary pixel sets, in pixels.
double hausdorff(const BinaryMask& a, const BinaryMask& b);

/// Linear interpolation between order statistics at h = (n - 1) p. `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);

/// Median, quartiles, range and a 95% percentile-bootstrap CI of the median. The bootstrap draws
/// `resamples` resamples from Rng(seed); the CI is widened to contain the sample median if needed.
SummaryStats summarize(std::span<const double> samples, std::uint64_t seed, int resamples = 2000);

/// Mann-Whitney U with midranks. Exact enumeration p when n_x + n_y <= 12 without ties,
/// otherwise the normal approximation with tie and continuity correction.
RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y);

/// Two-sided one-sample Student t-test against mu0.
TTestResult one_sample_ttest(std::span<const double> diffs, double mu0);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of freedom.
double students_t_two_sided_p(double t, double df);

/// ICC(2,1): two-way random effects, absolute agreement, single rater, two raters.
/// Returns 1 when every cell is identical.
double icc_absolute_agreement(std::span<const std::array<double, 2>> ratings);

}  // namespace starcut
