#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace starcut {

/// Continuous pixel coordinate. Pixel centers sit at integer (x, y); y grows downwards.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
inline Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
inline Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }
double distance(Point2D a, Point2D b);

/// Row-major grayscale raster with values in [0, 255] and optional isotropic spacing.
class GrayImage {
 public:
  GrayImage(int width, int height, std::vector<double> intensities,
            std::optional<double> spacing_mm = std::nullopt);
  GrayImage(int width, int height, double fill);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::optional<double> spacing_mm() const noexcept { return spacing_mm_; }
  void set_spacing_mm(std::optional<double> spacing);

  double at(int x, int y) const { return data_[index(x, y)]; }
  std::span<const double> intensities() const noexcept { return data_; }
  bool contains(Point2D p) const noexcept;

 private:
  std::size_t index(int x, int y) const;

  int width_;
  int height_;
  std::vector<double> data_;
  std::optional<double> spacing_mm_;
};

/// Closed polygon; the last vertex connects back to the first.
class Polygon {
 public:
  explicit Polygon(std::vector<Point2D> vertices);

  std::span<const Point2D> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  const Point2D& operator[](std::size_t i) const { return vertices_[i]; }

 private:
  std::vector<Point2D> vertices_;
};

/// Row-major boolean grid; true marks foreground.
class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool value) { bits_[static_cast<std::size_t>(y) * width_ + x] = value; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Reads PGM (P2/P5, maxval 255) or 8-bit grayscale PNG. Spacing comes from a
/// sidecar "<path>.meta" file holding a `spacing_mm=<value>` line, when present.
GrayImage load_image(const std::filesystem::path& path);

/// Writes binary PGM (P5). Intensities are rounded to the nearest integer.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// Writes the sidecar metadata next to `image_path`. Extra lines are appended verbatim.
void save_metadata(const std::filesystem::path& image_path, std::optional<double> spacing_mm,
                   std::span<const std::string> extra_lines = {});

std::optional<double> read_spacing_metadata(const std::filesystem::path& image_path);

/// Masks travel as P5 PGM with values {0, 255}; any nonzero value loads as foreground.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);

/// Bilinear interpolation between the four surrounding pixel centers. Throws
/// "out-of-bounds" when p lies outside [0, w-1] x [0, h-1].
double sample_bilinear(const GrayImage& img, Point2D p);

/// Even-odd scanline fill. A pixel center exactly on a left/top edge counts as inside,
/// on a right/bottom edge as outside.
BinaryMask rasterize_polygon(const Polygon& poly, int width, int height);

std::size_t mask_area(const BinaryMask& mask);

/// Even-odd point-in-polygon test using the same half-open convention as the rasterizer.
bool point_in_polygon(const Polygon& poly, Point2D p);

}  // namespace starcut
