#include "starcut/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "starcut/error.hpp"
#include "starcut/rng.hpp"

namespace starcut {

bool inside_ellipse(const PhantomSpec& spec, Point2D p, double grow) {
  const double dx = p.x - spec.center.x;
  const double dy = p.y - spec.center.y;
  const double c = std::cos(spec.rotation);
  const double s = std::sin(spec.rotation);
  const double u = (dx * c + dy * s) / (spec.semi_axis_a + grow);
  const double v = (-dx * s + dy * c) / (spec.semi_axis_b + grow);
  return u * u + v * v <= 1.0;
}

namespace {

void validate(const PhantomSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw input_error("invalid-phantom", "image must be at least 1x1");
  if (!(spec.semi_axis_a > 0.0 && spec.semi_axis_b > 0.0)) {
    throw input_error("invalid-phantom", "semi-axes must be positive");
  }
  if (spec.halo_width < 0.0 || spec.speckle_sigma < 0.0) {
    throw input_error("invalid-phantom", "halo width and speckle sigma must be non-negative");
  }
  for (double v : {spec.fg_mean, spec.bg_mean, spec.halo_mean}) {
    if (!(v >= 0.0 && v <= 255.0)) throw input_error("invalid-phantom", "region means must lie in [0, 255]");
  }
  const double a = spec.semi_axis_a + spec.halo_width;
  const double b = spec.semi_axis_b + spec.halo_width;
  const double c = std::cos(spec.rotation);
  const double s = std::sin(spec.rotation);
  const double ex = std::hypot(a * c, b * s);
  const double ey = std::hypot(a * s, b * c);
  if (spec.center.x - ex < 0.0 || spec.center.y - ey < 0.0 || spec.center.x + ex > spec.width - 1 ||
      spec.center.y + ey > spec.height - 1) {
    throw input_error("phantom-out-of-bounds", "lesion and halo do not fit inside the image");
  }
}

}  // namespace

Phantom generate(const PhantomSpec& spec) {
  validate(spec);
  Rng rng(spec.rng_seed);
  std::vector<double> pixels(static_cast<std::size_t>(spec.width) * spec.height);
  BinaryMask truth(spec.width, spec.height);
  const bool has_halo = spec.halo_width > 0.0;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Point2D p{static_cast<double>(x), static_cast<double>(y)};
      const bool lesion = inside_ellipse(spec, p);
      const bool halo = !lesion && has_halo && inside_ellipse(spec, p, spec.halo_width);
      double value = lesion ? spec.fg_mean : halo ? spec.halo_mean : spec.bg_mean;
      if (spec.speckle_sigma > 0.0) value *= 1.0 + spec.speckle_sigma * rng.normal();
      pixels[static_cast<std::size_t>(y) * spec.width + x] = std::round(std::clamp(value, 0.0, 255.0));
      truth.set(x, y, lesion || (halo && spec.halo_in_truth));
    }
  }
  return {spec, GrayImage(spec.width, spec.height, std::move(pixels), kAssumedPhantomSpacingMm), std::move(truth)};
}

std::vector<Phantom> generate_suite(int count, std::uint64_t seed, double min_diameter, double max_diameter,
                                    int image_size) {
  if (count < 1) throw input_error("invalid-argument", "suite count must be at least 1");
  if (!(min_diameter > 0.0 && max_diameter >= min_diameter)) {
    throw input_error("invalid-argument", "diameter range must be positive and ordered");
  }
  Rng rng(seed);
  const double log_lo = std::log(min_diameter);
  const double log_hi = std::log(max_diameter);
  std::vector<double> diameters(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double fraction = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    diameters[static_cast<std::size_t>(i)] = std::exp(log_lo + fraction * (log_hi - log_lo));
  }
  for (std::size_t i = diameters.size(); i > 1; --i) std::swap(diameters[i - 1], diameters[rng.index(i)]);

  std::vector<Phantom> suite;
  suite.reserve(diameters.size());
  for (double diameter : diameters) {
    PhantomSpec spec;
    spec.width = spec.height = image_size;
    spec.semi_axis_a = diameter / 2.0;
    spec.semi_axis_b = spec.semi_axis_a * rng.uniform(0.55, 1.0);
    spec.rotation = rng.uniform(0.0, std::numbers::pi);
    spec.fg_mean = std::round(rng.uniform(15.0, 60.0));
    spec.bg_mean = std::min(235.0, std::round(spec.fg_mean + rng.uniform(60.0, 140.0)));
    spec.halo_width = rng.uniform() < 0.3 ? std::round(rng.uniform(2.0, 6.0)) : 0.0;
    spec.halo_mean = std::round(spec.fg_mean + 0.4 * (spec.bg_mean - spec.fg_mean));
    spec.speckle_sigma = rng.uniform(0.0, 0.2);
    spec.rng_seed = rng.next();

    // At least 32 px of room so a default 40-node template at the center keeps a usable radial step.
    const double reach = std::max(spec.semi_axis_a + spec.halo_width + 8.0, 32.0);
    const double lo = reach;
    const double hi = image_size - 1 - reach;
    spec.center = {std::round(rng.uniform(lo, hi)), std::round(rng.uniform(lo, hi))};
    suite.push_back(generate(spec));
  }
  return suite;
}

std::string format_spec(const PhantomSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "width=" << spec.width << '\n'
     << "height=" << spec.height << '\n'
     << "center_x=" << spec.center.x << '\n'
     << "center_y=" << spec.center.y << '\n'
     << "semi_axis_a=" << spec.semi_axis_a << '\n'
     << "semi_axis_b=" << spec.semi_axis_b << '\n'
     << "rotation=" << spec.rotation << '\n'
     << "fg_mean=" << spec.fg_mean << '\n'
     << "bg_mean=" << spec.bg_mean << '\n'
     << "halo_width=" << spec.halo_width << '\n'
     << "halo_mean=" << spec.halo_mean << '\n'
     << "speckle_sigma=" << spec.speckle_sigma << '\n'
     << "rng_seed=" << spec.rng_seed << '\n'
     << "halo_in_truth=" << (spec.halo_in_truth ? 1 : 0) << '\n'
     << "spacing_mm=" << kAssumedPhantomSpacingMm << '\n'
     << "spacing_assumed=1\n";
  return os.str();
}

void write_phantom(const Phantom& phantom, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const auto image_path = dir / (stem + ".pgm");
  save_image(phantom.image, image_path);
  const std::string note = "spacing_assumed=1";
  save_metadata(image_path, phantom.image.spacing_mm(), std::span<const std::string>(&note, 1));
  save_mask(phantom.truth, dir / (stem + "_truth.pgm"));
  std::ofstream out(dir / (stem + ".spec"));
  if (!out) throw input_error("io-error", "cannot write phantom spec for " + stem);
  out << format_spec(phantom.spec);
}

}  // namespace starcut
