#include "starcut/outputs.hpp"

#include <fstream>
#include <sstream>

#include "starcut/error.hpp"

namespace starcut {

std::string format_contour_csv(const Polygon& contour) {
  std::ostringstream os;
  os.precision(17);
  os << "ray,x,y\n";
  for (std::size_t r = 0; r < contour.size(); ++r) os << r << ',' << contour[r].x << ',' << contour[r].y << '\n';
  return os.str();
}

void write_segmentation(const SegmentationResult& result, const SeedInput& input, const SegmentParams& params,
                        const std::string& image_label, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "contour.csv");
    if (!out) throw input_error("io-error", "cannot write " + (dir / "contour.csv").string());
    out << format_contour_csv(result.contour);
  }
  save_mask(result.mask, dir / "mask.pgm");

  std::ofstream out(dir / "result.txt");
  if (!out) throw input_error("io-error", "cannot write " + (dir / "result.txt").string());
  out.precision(17);
  out << "image=" << image_label << '\n'
      << "seed_x=" << input.seed.x << '\n'
      << "seed_y=" << input.seed.y << '\n'
      << "helper_count=" << input.helpers.size() << '\n';
  for (std::size_t h = 0; h < input.helpers.size(); ++h) {
    out << "helper_" << h << '=' << input.helpers[h].x << ',' << input.helpers[h].y << '\n';
  }
  out << "ray_count=" << params.ray_count << '\n'
      << "nodes_per_ray=" << params.nodes_per_ray << '\n'
      << "max_radius=" << params.max_radius << '\n'
      << "rho=" << params.rho << '\n'
      << "delta_r=" << params.delta_r << '\n'
      << "edge_window=" << params.edge_window << '\n'
      << "radial_step=" << result.tpl.radial_step() << '\n'
      << "cut_index=";
  for (std::size_t r = 0; r < result.cut_index.size(); ++r) out << (r ? "," : "") << result.cut_index[r];
  out << '\n'
      << "mask_area_px=" << mask_area(result.mask) << '\n'
      << "diameter_a_px=" << result.diameters.a << '\n'
      << "diameter_b_px=" << result.diameters.b << '\n';
  if (result.diameter_a_mm && result.diameter_b_mm) {
    out << "diameter_a_mm=" << *result.diameter_a_mm << '\n' << "diameter_b_mm=" << *result.diameter_b_mm << '\n';
  } else {
    out << "diameter_unit=px (no pixel spacing)\n";
  }
  out << "warnings=" << result.warnings.size() << '\n';
  for (const auto& w : result.warnings) out << "warning=" << w << '\n';
  out << "elapsed_s=" << result.elapsed_seconds << '\n';
}

}  // namespace starcut
