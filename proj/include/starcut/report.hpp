#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "starcut/evaluation.hpp"

namespace starcut {

/// One examiner's columns of a manifest row.
struct ExaminerEntry {
  std::filesystem::path manual_mask;
  std::filesystem::path semi_mask;
  double time_manual = 0.0;
  double time_semi = 0.0;
  bool satisfied = false;
  /// Diameters measured by hand, in the report unit; derived from the manual mask when absent.
  std::optional<double> diam_a_manual;
  std::optional<double> diam_b_manual;
};

struct ManifestEntry {
  std::string lesion_id;
  std::array<std::optional<ExaminerEntry>, 2> examiners;
  std::optional<double> spacing_mm;
};

/// CSV with a header row. Required columns: lesion_id, manual_mask, semi_mask, time_manual,
/// time_semi, satisfied. Optional: the same set suffixed `_2` for a second examiner,
/// diam_a_manual / diam_b_manual (and `_2`), spacing_mm. Paths are relative to the manifest.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct TimeTable {
  std::size_t n = 0;
  std::optional<SummaryStats> manual;
  std::optional<SummaryStats> semi;
  std::optional<RankSumResult> rank_sum;
  std::optional<TTestResult> ttest;
};

struct OverlapTable {
  std::size_t n = 0;
  std::optional<SummaryStats> dsc;
  std::optional<SummaryStats> hd;
};

struct DiameterTable {
  std::size_t n = 0;
  std::optional<SummaryStats> diam_a;
  std::optional<SummaryStats> diam_b;
};

struct ExaminerReport {
  int examiner = 1;
  std::vector<EvalRecord> records;
  std::size_t satisfied = 0;
  /// Rows computed over satisfied records only, and over every record.
  TimeTable time;
  TimeTable time_all;
  OverlapTable overlap;
  OverlapTable overlap_all;
  DiameterTable diameters;
  DiameterTable diameters_all;
};

struct StudyReport {
  std::uint64_t bootstrap_seed = 0;
  std::string diameter_unit = "px";
  std::vector<ExaminerReport> examiners;
  std::optional<double> icc;
  std::size_t icc_n = 0;
  std::string icc_note;
};

/// Compares one manual/semiautomatic mask pair; diameters come from the boundary pixels.
EvalRecord evaluate_pair(const std::string& lesion_id, const BinaryMask& manual, const BinaryMask& semi,
                         const ExaminerEntry& entry, std::optional<double> spacing_mm);

StudyReport evaluate_study(const std::vector<ManifestEntry>& manifest, std::uint64_t bootstrap_seed);

/// Writes report.txt plus records.csv, table_time[_all].csv, table_overlap[_all].csv,
/// table_diameters[_all].csv and icc.csv.
void write_report(const StudyReport& report, const std::filesystem::path& dir);

}  // namespace starcut
