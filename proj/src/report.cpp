#include "starcut/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "starcut/error.hpp"
#include "starcut/segmenter.hpp"

namespace starcut {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& text, const std::string& column, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw input_error("manifest-error", "line " + std::to_string(line_no) + ": column " + column +
                                            " is not a number: '" + text + "'");
  }
}

bool parse_flag(const std::string& text, std::size_t line_no) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "1" || t == "true" || t == "yes" || t == "y") return true;
  if (t == "0" || t == "false" || t == "no" || t == "n") return false;
  throw input_error("manifest-error", "line " + std::to_string(line_no) + ": bad satisfied flag '" + text + "'");
}

Diameters mask_diameters(const BinaryMask& mask) {
  std::vector<Point2D> points;
  for (const auto& p : boundary_pixels(mask)) points.push_back({static_cast<double>(p[0]), static_cast<double>(p[1])});
  return compute_diameters(points);
}

template <typename Field>
std::vector<double> column(const std::vector<EvalRecord>& records, Field field) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(field(r));
  return v;
}

std::optional<SummaryStats> maybe_summary(const std::vector<double>& v, std::uint64_t seed) {
  if (v.empty()) return std::nullopt;
  return summarize(v, seed);
}

void fill_tables(const std::vector<EvalRecord>& records, std::uint64_t seed, TimeTable& time, OverlapTable& overlap,
                 DiameterTable& diameters) {
  const auto manual = column(records, [](const EvalRecord& r) { return r.time_manual; });
  const auto semi = column(records, [](const EvalRecord& r) { return r.time_semi; });
  time.n = overlap.n = diameters.n = records.size();
  time.manual = maybe_summary(manual, seed + 1);
  time.semi = maybe_summary(semi, seed + 2);
  if (!records.empty()) time.rank_sum = wilcoxon_rank_sum(manual, semi);
  std::vector<double> diffs(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) diffs[i] = manual[i] - semi[i];
  try {
    time.ttest = one_sample_ttest(diffs, 0.0);
  } catch (const Error&) {
    time.ttest.reset();
  }
  overlap.dsc = maybe_summary(column(records, [](const EvalRecord& r) { return 100.0 * r.dsc; }), seed + 3);
  overlap.hd = maybe_summary(column(records, [](const EvalRecord& r) { return r.hd; }), seed + 4);
  diameters.diam_a = maybe_summary(column(records, [](const EvalRecord& r) { return r.diam_a_diff; }), seed + 5);
  diameters.diam_b = maybe_summary(column(records, [](const EvalRecord& r) { return r.diam_b_diff; }), seed + 6);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("io-error", "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) throw input_error("manifest-error", "manifest is empty");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (const char* required : {"lesion_id", "manual_mask", "semi_mask", "time_manual", "time_semi", "satisfied"}) {
    if (!index.count(required)) throw input_error("manifest-error", std::string("missing column ") + required);
  }
  const bool second = index.count("manual_mask_2") > 0;
  if (second) {
    for (const char* required : {"semi_mask_2", "time_manual_2", "time_semi_2", "satisfied_2"}) {
      if (!index.count(required)) throw input_error("manifest-error", std::string("missing column ") + required);
    }
  }

  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw input_error("manifest-error", "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                              " cells, header has " + std::to_string(header.size()));
    }
    auto cell = [&](const std::string& name) -> const std::string& { return cells[index.at(name)]; };
    auto optional_number = [&](const std::string& name) -> std::optional<double> {
      if (!index.count(name) || cell(name).empty() || cell(name) == "NA") return std::nullopt;
      return parse_number(cell(name), name, line_no);
    };
    auto examiner = [&](const std::string& suffix) -> std::optional<ExaminerEntry> {
      if (cell("manual_mask" + suffix).empty()) return std::nullopt;
      ExaminerEntry e;
      e.manual_mask = base / cell("manual_mask" + suffix);
      e.semi_mask = base / cell("semi_mask" + suffix);
      e.time_manual = parse_number(cell("time_manual" + suffix), "time_manual" + suffix, line_no);
      e.time_semi = parse_number(cell("time_semi" + suffix), "time_semi" + suffix, line_no);
      if (!(e.time_manual > 0.0 && e.time_semi > 0.0)) {
        throw input_error("manifest-error", "line " + std::to_string(line_no) + ": times must be positive");
      }
      e.satisfied = parse_flag(cell("satisfied" + suffix), line_no);
      e.diam_a_manual = optional_number("diam_a_manual" + suffix);
      e.diam_b_manual = optional_number("diam_b_manual" + suffix);
      return e;
    };
    ManifestEntry entry;
    entry.lesion_id = cell("lesion_id");
    entry.examiners[0] = examiner("");
    if (second) entry.examiners[1] = examiner("_2");
    entry.spacing_mm = optional_number("spacing_mm");
    entries.push_back(std::move(entry));
  }
  return entries;
}

EvalRecord evaluate_pair(const std::string& lesion_id, const BinaryMask& manual, const BinaryMask& semi,
                         const ExaminerEntry& entry, std::optional<double> spacing_mm) {
  EvalRecord r;
  r.lesion_id = lesion_id;
  r.dsc = dice(manual, semi);
  r.hd = hausdorff(manual, semi);
  const double scale = spacing_mm.value_or(1.0);
  const Diameters semi_d = mask_diameters(semi);
  double manual_a = 0.0;
  double manual_b = 0.0;
  if (entry.diam_a_manual && entry.diam_b_manual) {
    manual_a = *entry.diam_a_manual;
    manual_b = *entry.diam_b_manual;
  } else {
    const Diameters manual_d = mask_diameters(manual);
    manual_a = manual_d.a * scale;
    manual_b = manual_d.b * scale;
  }
  r.diam_a_diff = std::abs(manual_a - semi_d.a * scale);
  r.diam_b_diff = std::abs(manual_b - semi_d.b * scale);
  r.time_manual = entry.time_manual;
  r.time_semi = entry.time_semi;
  r.satisfied = entry.satisfied;
  return r;
}

StudyReport evaluate_study(const std::vector<ManifestEntry>& manifest, std::uint64_t bootstrap_seed) {
  StudyReport report;
  report.bootstrap_seed = bootstrap_seed;
  const bool all_spaced =
      !manifest.empty() && std::all_of(manifest.begin(), manifest.end(), [](const auto& e) { return e.spacing_mm.has_value(); });
  report.diameter_unit = all_spaced ? "mm" : "px";

  const bool has_second = std::any_of(manifest.begin(), manifest.end(), [](const auto& e) { return e.examiners[1].has_value(); });
  const int examiners = has_second ? 2 : 1;
  std::vector<std::map<std::string, EvalRecord>> by_id(static_cast<std::size_t>(examiners));

  for (int x = 0; x < examiners; ++x) {
    ExaminerReport ex;
    ex.examiner = x + 1;
    for (const auto& entry : manifest) {
      const auto& columns = entry.examiners[static_cast<std::size_t>(x)];
      if (!columns) continue;
      const BinaryMask manual = load_mask(columns->manual_mask);
      const BinaryMask semi = load_mask(columns->semi_mask);
      EvalRecord record = evaluate_pair(entry.lesion_id, manual, semi, *columns,
                                        all_spaced ? entry.spacing_mm : std::nullopt);
      by_id[static_cast<std::size_t>(x)][entry.lesion_id] = record;
      ex.records.push_back(std::move(record));
    }
    std::vector<EvalRecord> satisfied;
    std::copy_if(ex.records.begin(), ex.records.end(), std::back_inserter(satisfied),
                 [](const EvalRecord& r) { return r.satisfied; });
    ex.satisfied = satisfied.size();
    const std::uint64_t seed = bootstrap_seed + 100u * static_cast<std::uint64_t>(x);
    fill_tables(satisfied, seed, ex.time, ex.overlap, ex.diameters);
    fill_tables(ex.records, seed + 50u, ex.time_all, ex.overlap_all, ex.diameters_all);
    report.examiners.push_back(std::move(ex));
  }

  if (examiners < 2) {
    report.icc_note = "ICC omitted: a single examiner";
    return report;
  }
  std::vector<std::array<double, 2>> ratings;
  for (const auto& entry : manifest) {
    auto first = by_id[0].find(entry.lesion_id);
    auto second = by_id[1].find(entry.lesion_id);
    if (first == by_id[0].end() || second == by_id[1].end()) continue;
    if (!first->second.satisfied || !second->second.satisfied) continue;
    ratings.push_back({first->second.dsc, second->second.dsc});
  }
  report.icc_n = ratings.size();
  if (ratings.size() < 3) {
    report.icc_note = "ICC omitted: fewer than 3 lesions satisfied by both examiners";
  } else {
    report.icc = icc_absolute_agreement(ratings);
    report.icc_note = "ICC(2,1) absolute agreement of DSC over lesions satisfied by both examiners";
  }
  return report;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw input_error("io-error", "cannot write " + path.string());
  out << text;
}

std::string stats_cells(const std::optional<SummaryStats>& s, bool with_ci, bool with_quartiles) {
  if (!s) {
    int cells = 3 + (with_ci ? 2 : 0) + (with_quartiles ? 2 : 0);
    std::string out = "NA";
    for (int i = 1; i < cells; ++i) out += ",NA";
    return out;
  }
  std::string out = num(s->median);
  if (with_quartiles) out += "," + num(s->q1) + "," + num(s->q3);
  if (with_ci) out += "," + num(s->ci_low) + "," + num(s->ci_high);
  out += "," + num(s->min) + "," + num(s->max);
  return out;
}

std::string time_csv(const StudyReport& report, bool all) {
  std::ostringstream os;
  os << "examiner,n,manual_median,manual_q1,manual_q3,manual_min,manual_max,"
        "semi_median,semi_q1,semi_q3,semi_min,semi_max,wilcoxon_u,wilcoxon_p,ttest_t,ttest_p\n";
  for (const auto& ex : report.examiners) {
    const TimeTable& t = all ? ex.time_all : ex.time;
    os << ex.examiner << ',' << t.n << ',' << stats_cells(t.manual, false, true) << ','
       << stats_cells(t.semi, false, true) << ',';
    os << (t.rank_sum ? num(t.rank_sum->u) + "," + num(t.rank_sum->p) : "NA,NA") << ',';
    os << (t.ttest ? num(t.ttest->t) + "," + num(t.ttest->p) : "NA,NA") << '\n';
  }
  return os.str();
}

std::string overlap_csv(const StudyReport& report, bool all) {
  std::ostringstream os;
  os << "examiner,n,dsc_pct_median,dsc_pct_ci_low,dsc_pct_ci_high,dsc_pct_min,dsc_pct_max,"
        "hd_px_median,hd_px_ci_low,hd_px_ci_high,hd_px_min,hd_px_max\n";
  for (const auto& ex : report.examiners) {
    const OverlapTable& t = all ? ex.overlap_all : ex.overlap;
    os << ex.examiner << ',' << t.n << ',' << stats_cells(t.dsc, true, false) << ','
       << stats_cells(t.hd, true, false) << '\n';
  }
  return os.str();
}

std::string diameter_csv(const StudyReport& report, bool all) {
  std::ostringstream os;
  os << "examiner,n,unit,diam_a_diff_median,diam_a_diff_q1,diam_a_diff_q3,diam_b_diff_median,diam_b_diff_q1,"
        "diam_b_diff_q3\n";
  auto trio = [](const std::optional<SummaryStats>& s) {
    return s ? num(s->median) + "," + num(s->q1) + "," + num(s->q3) : std::string("NA,NA,NA");
  };
  for (const auto& ex : report.examiners) {
    const DiameterTable& t = all ? ex.diameters_all : ex.diameters;
    os << ex.examiner << ',' << t.n << ',' << report.diameter_unit << ',' << trio(t.diam_a) << ',' << trio(t.diam_b)
       << '\n';
  }
  return os.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string text_report(const StudyReport& report) {
  std::ostringstream os;
  os << "# starcut evaluation report\n"
     << "# bootstrap_seed=" << report.bootstrap_seed << " resamples=2000 method=percentile\n\n";
  for (const auto& ex : report.examiners) {
    os << "Examiner " << ex.examiner << ": " << ex.records.size() << " lesions, " << ex.satisfied
       << " satisfied (summary rows use satisfied lesions only)\n\n";
    const TimeTable& t = ex.time;
    os << "  Time (s)         Median     Q1     Q3    Min    Max\n";
    auto time_row = [&](const char* label, const std::optional<SummaryStats>& s) {
      os << "  " << label;
      if (!s) {
        os << "  n/a\n";
        return;
      }
      for (double v : {s->median, s->q1, s->q3, s->min, s->max}) {
        std::string cell = fixed(v, 1);
        os << std::string(cell.size() < 7 ? 7 - cell.size() : 1, ' ') << cell;
      }
      os << '\n';
    };
    time_row("Manual        ", t.manual);
    time_row("Semiautomatic ", t.semi);
    os << "  Wilcoxon rank-sum p = " << (t.rank_sum ? num(t.rank_sum->p) : "n/a")
       << (t.rank_sum && t.rank_sum->exact ? " (exact)" : "") << "; one-sample t-test on differences p = "
       << (t.ttest ? num(t.ttest->p) : "n/a") << "\n\n";

    const OverlapTable& o = ex.overlap;
    auto ci_row = [&](const char* label, const std::optional<SummaryStats>& s) {
      os << "  " << label;
      if (!s) {
        os << "  n/a\n";
        return;
      }
      os << "  median " << fixed(s->median, 1) << "  95% CI " << fixed(s->ci_low, 1) << "-" << fixed(s->ci_high, 1)
         << "  min " << fixed(s->min, 1) << "  max " << fixed(s->max, 1) << '\n';
    };
    ci_row("DSC (%)", o.dsc);
    ci_row("HD (px)", o.hd);
    const DiameterTable& d = ex.diameters;
    if (d.diam_a && d.diam_b) {
      os << "  Diameter difference (" << report.diameter_unit << "): a median " << fixed(d.diam_a->median, 1) << " (Q1-Q3 "
         << fixed(d.diam_a->q1, 1) << "-" << fixed(d.diam_a->q3, 1) << "), b median " << fixed(d.diam_b->median, 1)
         << " (Q1-Q3 " << fixed(d.diam_b->q1, 1) << "-" << fixed(d.diam_b->q3, 1) << ")\n";
    }
    os << '\n';
  }
  os << "ICC: " << (report.icc ? num(*report.icc) : "n/a") << " (n=" << report.icc_n << "; " << report.icc_note << ")\n";
  os << "All-records variants: table_*_all.csv\n";
  return os.str();
}

}  // namespace

void write_report(const StudyReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.txt", text_report(report));
  std::ostringstream records;
  records << "examiner,lesion_id,dsc,hd_px,diam_a_diff,diam_b_diff,time_manual,time_semi,satisfied\n";
  for (const auto& ex : report.examiners) {
    for (const auto& r : ex.records) {
      records << ex.examiner << ',' << r.lesion_id << ',' << num(r.dsc) << ',' << num(r.hd) << ','
              << num(r.diam_a_diff) << ',' << num(r.diam_b_diff) << ',' << num(r.time_manual) << ','
              << num(r.time_semi) << ',' << (r.satisfied ? 1 : 0) << '\n';
    }
  }
  write_file(dir / "records.csv", records.str());
  write_file(dir / "table_time.csv", time_csv(report, false));
  write_file(dir / "table_time_all.csv", time_csv(report, true));
  write_file(dir / "table_overlap.csv", overlap_csv(report, false));
  write_file(dir / "table_overlap_all.csv", overlap_csv(report, true));
  write_file(dir / "table_diameters.csv", diameter_csv(report, false));
  write_file(dir / "table_diameters_all.csv", diameter_csv(report, true));
  write_file(dir / "icc.csv", "n,icc,note\n" + std::to_string(report.icc_n) + "," + num(report.icc) + "," +
                                  report.icc_note + "\n");
}

}  // namespace starcut
