#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "starcut/imaging.hpp"

namespace starcut {

/// Pixel spacing written into phantom metadata; an assumption, not a measured value.
inline constexpr double kAssumedPhantomSpacingMm = 0.5;

struct PhantomSpec {
  int width = 256;
  int height = 256;
  Point2D center{128.0, 128.0};
  double semi_axis_a = 40.0;
  double semi_axis_b = 20.0;
  /// Rotation of the a-axis, radians.
  double rotation = 0.0;
  double fg_mean = 30.0;
  double bg_mean = 130.0;
  double halo_width = 0.0;
  double halo_mean = 70.0;
  double speckle_sigma = 0.0;
  std::uint64_t rng_seed = 1;
  /// Count the halo as lesion in the ground truth.
  bool halo_in_truth = false;
};

struct Phantom {
  PhantomSpec spec;
  GrayImage image;
  BinaryMask truth;
};

/// Piecewise-constant ellipse/halo/background image with multiplicative speckle
/// value * (1 + sigma z), z ~ N(0, 1) drawn row-major from Rng(rng_seed), clamped to [0, 255]
/// and rounded to integers so the image survives a PGM round trip unchanged.
/// Throws "phantom-out-of-bounds" when the lesion and halo do not fit.
Phantom generate(const PhantomSpec& spec);

/// Randomized suite: major diameters stratified log-uniformly over [min_diameter, max_diameter]
/// pixels, varied contrast, rotation, speckle and halo presence. Deterministic in `seed`.
std::vector<Phantom> generate_suite(int count, std::uint64_t seed, double min_diameter = 12.0,
                                    double max_diameter = 230.0, int image_size = 512);

/// Membership of a point in the (optionally enlarged) lesion ellipse.
bool inside_ellipse(const PhantomSpec& spec, Point2D p, double grow = 0.0);

/// Writes <stem>.pgm, <stem>_truth.pgm, <stem>.pgm.meta and <stem>.spec under `dir`.
void write_phantom(const Phantom& phantom, const std::filesystem::path& dir, const std::string& stem);

/// key=value rendering of a spec, fixed field order.
std::string format_spec(const PhantomSpec& spec);

}  // namespace starcut
