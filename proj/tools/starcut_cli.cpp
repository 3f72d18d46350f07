#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "starcut/error.hpp"
#include "starcut/outputs.hpp"
#include "starcut/phantom.hpp"
#include "starcut/report.hpp"
#include "starcut/segmenter.hpp"
#include "starcut/session.hpp"

namespace {

using namespace starcut;

void add_segment_params(CLI::App* cmd, SegmentParams& p) {
  cmd->add_option("--rays", p.ray_count, "Number of rays R")->check(CLI::Range(3, 100000));
  cmd->add_option("--nodes", p.nodes_per_ray, "Nodes per ray N")->check(CLI::Range(2, 100000));
  cmd->add_option("--max-radius", p.max_radius, "Template radius in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--rho", p.rho, "Seed-region radius for the reference gray value")->check(CLI::PositiveNumber);
  cmd->add_option("--delta-r", p.delta_r, "Smoothness: max cut difference of adjacent rays")->check(CLI::NonNegativeNumber);
  cmd->add_option("--edge-window", p.edge_window, "Nodes averaged on each side of a boundary")->check(CLI::Range(1, 1000));
}

Point2D parse_point(const std::string& text) {
  std::istringstream in(text);
  Point2D p;
  char comma = 0;
  if (!(in >> p.x >> comma >> p.y) || comma != ',') {
    throw input_error("invalid-argument", "expected x,y but got '" + text + "'");
  }
  return p;
}

int run_segment(const std::string& image_path, const std::vector<double>& seed, const std::vector<std::string>& helpers,
                const SegmentParams& params, std::optional<double> spacing, const std::string& out_dir) {
  GrayImage img = load_image(image_path);
  if (spacing) img.set_spacing_mm(spacing);
  SeedInput input;
  input.seed = {seed.at(0), seed.at(1)};
  if (!img.contains(input.seed)) {
    throw input_error("seed-out-of-bounds", "seed (" + std::to_string(input.seed.x) + ", " +
                                                std::to_string(input.seed.y) + ") outside the image");
  }
  for (const auto& h : helpers) input.helpers.push_back(parse_point(h));
  const SegmentationResult result = segment(img, input, params);
  write_segmentation(result, input, params, image_path, out_dir);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_phantom(PhantomSpec spec, int count, std::uint64_t seed, const std::string& out_dir, const std::string& stem) {
  if (count <= 0) {
    write_phantom(generate(spec), out_dir, stem);
    return 0;
  }
  const auto suite = generate_suite(count, seed);
  std::filesystem::create_directories(out_dir);
  std::ofstream seeds(std::filesystem::path(out_dir) / "seeds.csv");
  if (!seeds) throw input_error("io-error", "cannot write seeds.csv in " + out_dir);
  seeds.precision(17);
  seeds << "stem,seed_x,seed_y\n";
  for (std::size_t i = 0; i < suite.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%s_%03zu", stem.c_str(), i);
    write_phantom(suite[i], out_dir, name);
    seeds << name << ',' << suite[i].spec.center.x << ',' << suite[i].spec.center.y << '\n';
  }
  return 0;
}

int run_replay(const std::string& log_path, const std::string& out_dir, std::size_t which) {
  std::ifstream in(log_path);
  if (!in) throw input_error("io-error", "cannot open " + log_path);
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (index++ != which) continue;
    const SessionLog log = session_log_from_json(line);
    const SegmentationResult result = replay_session(log);
    write_segmentation(result, final_seed_input(log), log.params, log.image, out_dir);
    return 0;
  }
  throw input_error("invalid-argument", "session log has no entry " + std::to_string(which));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"starcut: seed-driven radial graph-cut lesion segmentation"};
  app.require_subcommand(1);

  SegmentParams params;

  auto* seg = app.add_subcommand("segment", "Segment one lesion from a seed point");
  std::string image_path;
  std::vector<double> seed;
  std::vector<std::string> helpers;
  std::optional<double> spacing;
  std::string seg_out = "segment_out";
  seg->add_option("image", image_path, "PGM or 8-bit grayscale PNG")->required();
  seg->add_option("--seed", seed, "Seed point: X Y")->expected(2)->required();
  seg->add_option("--helper", helpers, "Helper seed on the border as X,Y (repeatable)");
  seg->add_option("--spacing-mm", spacing, "Pixel spacing overriding the .meta sidecar")->check(CLI::PositiveNumber);
  seg->add_option("--out", seg_out, "Output directory");
  add_segment_params(seg, params);

  auto* eval = app.add_subcommand("evaluate", "Build the study report from a manifest");
  std::string manifest;
  std::string eval_out = "report";
  std::uint64_t bootstrap_seed = 20240101;
  eval->add_option("manifest", manifest, "Manifest CSV")->required();
  eval->add_option("--out", eval_out, "Report directory");
  eval->add_option("--seed", bootstrap_seed, "Bootstrap RNG seed");

  auto* ph = app.add_subcommand("phantom", "Generate synthetic lesion phantoms");
  PhantomSpec spec;
  int count = 0;
  std::uint64_t suite_seed = 1;
  std::string ph_out = "phantoms";
  std::string stem = "phantom";
  ph->add_option("--out", ph_out, "Output directory");
  ph->add_option("--stem", stem, "File name stem");
  ph->add_option("--count", count, "Generate a randomized suite of this size");
  ph->add_option("--suite-seed", suite_seed, "Suite RNG seed");
  ph->add_option("--width", spec.width);
  ph->add_option("--height", spec.height);
  ph->add_option("--cx", spec.center.x);
  ph->add_option("--cy", spec.center.y);
  ph->add_option("--semi-a", spec.semi_axis_a);
  ph->add_option("--semi-b", spec.semi_axis_b);
  ph->add_option("--rotation", spec.rotation, "Radians");
  ph->add_option("--fg", spec.fg_mean);
  ph->add_option("--bg", spec.bg_mean);
  ph->add_option("--halo-width", spec.halo_width);
  ph->add_option("--halo-mean", spec.halo_mean);
  ph->add_option("--speckle", spec.speckle_sigma);
  ph->add_option("--rng-seed", spec.rng_seed);
  ph->add_flag("--halo-in-truth", spec.halo_in_truth);

  auto* srv = app.add_subcommand("serve", "Run the JSON-lines session protocol (stdio or TCP)");
  std::optional<int> port;
  std::optional<std::string> log_path;
  std::optional<std::string> serve_out;
  srv->add_option("--port", port, "Listen on 127.0.0.1:PORT instead of stdio (0 = any free port)");
  srv->add_option("--log", log_path, "Append finished session logs to this file");
  srv->add_option("--out", serve_out, "Write final masks and contours here");
  add_segment_params(srv, params);

  auto* rep = app.add_subcommand("replay", "Re-run a recorded session log");
  std::string replay_log;
  std::string replay_out = "replay_out";
  std::size_t replay_index = 0;
  rep->add_option("log", replay_log, "Session log (JSON lines)")->required();
  rep->add_option("--index", replay_index, "Which log entry to replay");
  rep->add_option("--out", replay_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*seg) return run_segment(image_path, seed, helpers, params, spacing, seg_out);
    if (*eval) {
      const StudyReport report = evaluate_study(read_manifest(manifest), bootstrap_seed);
      write_report(report, eval_out);
      return 0;
    }
    if (*ph) return run_phantom(spec, count, suite_seed, ph_out, stem);
    if (*rep) return run_replay(replay_log, replay_out, replay_index);
    if (*srv) {
      SessionConfig config;
      config.params = params;
      if (log_path) config.log_path = *log_path;
      if (serve_out) config.output_dir = *serve_out;
      Session session(config);
      if (port) {
        serve_tcp(session, *port, [](int bound) { std::cout << "listening " << bound << std::endl; });
      } else {
        auto channel = make_stream_channel(std::cin, std::cout);
        serve(session, *channel);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal-error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
