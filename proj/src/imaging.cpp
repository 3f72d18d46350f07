#include "starcut/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "starcut/error.hpp"

namespace starcut {

double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

GrayImage::GrayImage(int width, int height, std::vector<double> intensities,
                     std::optional<double> spacing_mm)
    : width_(width), height_(height), data_(std::move(intensities)) {
  if (width < 1 || height < 1) {
    throw input_error("invalid-image", "dimensions must be at least 1x1");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw input_error("invalid-image", "intensity count does not match width x height");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 255.0)) {
      throw input_error("invalid-image", "intensity outside [0, 255]: " + std::to_string(v));
    }
  }
  set_spacing_mm(spacing_mm);
}

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)),
                                    fill)) {}

void GrayImage::set_spacing_mm(std::optional<double> spacing) {
  if (spacing && !(*spacing > 0.0 && std::isfinite(*spacing))) {
    throw input_error("invalid-image", "spacing_mm must be positive");
  }
  spacing_mm_ = spacing;
}

bool GrayImage::contains(Point2D p) const noexcept {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ - 1 && p.y <= height_ - 1;
}

std::size_t GrayImage::index(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) {
    throw input_error("out-of-bounds", "pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                                           ") outside image");
  }
  return static_cast<std::size_t>(y) * width_ + x;
}

Polygon::Polygon(std::vector<Point2D> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw input_error("invalid-polygon", "a polygon needs at least 3 vertices");
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const auto& p = vertices_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw input_error("invalid-polygon", "non-finite vertex");
    }
    if (p == vertices_[(i + 1) % vertices_.size()]) {
      throw input_error("invalid-polygon", "consecutive vertices coincide");
    }
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
            fill ? 1 : 0) {
  if (width < 1 || height < 1) throw input_error("invalid-mask", "dimensions must be at least 1x1");
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 1 || height < 1) throw input_error("invalid-mask", "dimensions must be at least 1x1");
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw input_error("invalid-mask", "bit count does not match width x height");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

namespace {

Error format_error(const std::filesystem::path& path, const std::string& why) {
  return input_error("format-error", path.string() + ": " + why);
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  while (true) {
    int c = in.get();
    if (c == EOF) throw format_error(path, "truncated header");
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
}

int parse_int(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw format_error(path, "malformed number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw format_error(path, "malformed number '" + s + "'");
  }
}

struct RawGray {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

RawGray read_pgm(std::istream& in, const std::filesystem::path& path) {
  std::string magic = next_token(in, path);
  if (magic != "P2" && magic != "P5") throw format_error(path, "unsupported magic '" + magic + "'");
  RawGray raw;
  raw.width = parse_int(next_token(in, path), path);
  raw.height = parse_int(next_token(in, path), path);
  int maxval = parse_int(next_token(in, path), path);
  if (raw.width < 1 || raw.height < 1) throw format_error(path, "non-positive dimensions");
  if (maxval != 255) throw format_error(path, "unsupported maxval " + std::to_string(maxval));
  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height;
  raw.pixels.resize(count);
  if (magic == "P5") {
    // next_token consumed exactly one whitespace byte after maxval
    in.read(reinterpret_cast<char*>(raw.pixels.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) throw format_error(path, "truncated pixel data");
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::string tok;
      if (!(in >> tok)) throw format_error(path, "truncated pixel data");
      int v = parse_int(tok, path);
      if (v < 0 || v > 255) throw format_error(path, "pixel value out of range");
      raw.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return raw;
}

RawGray read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw format_error(path, std::string("png decode failed: ") + image.message);
  }
  if (image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) {
    png_image_free(&image);
    throw format_error(path, "only single-channel grayscale PNG is supported");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw format_error(path, "only 8-bit PNG is supported");
  }
  image.format = PNG_FORMAT_GRAY;
  RawGray raw;
  raw.width = static_cast<int>(image.width);
  raw.height = static_cast<int>(image.height);
  raw.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.pixels.data(), 0, nullptr)) {
    throw format_error(path, std::string("png decode failed: ") + image.message);
  }
  return raw;
}

RawGray read_gray_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("io-error", "cannot open " + path.string());
  char sig[8] = {};
  in.read(sig, 8);
  const auto got = in.gcount();
  in.clear();
  in.seekg(0);
  if (got >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(sig), 0, 8) == 0) {
    in.close();
    return read_png(path);
  }
  return read_pgm(in, path);
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("io-error", "cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw input_error("io-error", "write failed for " + path.string());
}

std::filesystem::path meta_path(const std::filesystem::path& image_path) {
  return std::filesystem::path(image_path.string() + ".meta");
}

}  // namespace

std::optional<double> read_spacing_metadata(const std::filesystem::path& image_path) {
  std::ifstream in(meta_path(image_path));
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(0, eq) != "spacing_mm") continue;
    try {
      double v = std::stod(line.substr(eq + 1));
      if (!(v > 0.0)) throw std::invalid_argument("non-positive");
      return v;
    } catch (const std::logic_error&) {
      throw input_error("format-error", meta_path(image_path).string() + ": bad spacing_mm value");
    }
  }
  return std::nullopt;
}

void save_metadata(const std::filesystem::path& image_path, std::optional<double> spacing_mm,
                   std::span<const std::string> extra_lines) {
  std::ofstream out(meta_path(image_path));
  if (!out) throw input_error("io-error", "cannot write " + meta_path(image_path).string());
  if (spacing_mm) {
    std::ostringstream v;
    v.precision(17);
    v << *spacing_mm;
    out << "spacing_mm=" << v.str() << '\n';
  }
  for (const auto& line : extra_lines) out << line << '\n';
}

GrayImage load_image(const std::filesystem::path& path) {
  RawGray raw = read_gray_file(path);
  std::vector<double> values(raw.pixels.begin(), raw.pixels.end());
  return GrayImage(raw.width, raw.height, std::move(values), read_spacing_metadata(path));
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> pixels;
  pixels.reserve(img.intensities().size());
  for (double v : img.intensities()) pixels.push_back(static_cast<std::uint8_t>(std::lround(v)));
  write_pgm(path, img.width(), img.height(), pixels);
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> pixels;
  pixels.reserve(mask.bits().size());
  for (auto b : mask.bits()) pixels.push_back(b ? 255 : 0);
  write_pgm(path, mask.width(), mask.height(), pixels);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  RawGray raw = read_gray_file(path);
  return BinaryMask(raw.width, raw.height, std::move(raw.pixels));
}

double sample_bilinear(const GrayImage& img, Point2D p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !img.contains(p)) {
    throw input_error("out-of-bounds", "sample point (" + std::to_string(p.x) + ", " +
                                           std::to_string(p.y) + ") outside image");
  }
  int x0 = std::min(static_cast<int>(std::floor(p.x)), std::max(img.width() - 2, 0));
  int y0 = std::min(static_cast<int>(std::floor(p.y)), std::max(img.height() - 2, 0));
  int x1 = std::min(x0 + 1, img.width() - 1);
  int y1 = std::min(y0 + 1, img.height() - 1);
  double fx = p.x - x0;
  double fy = p.y - y0;
  if (fx == 0.0 && fy == 0.0) return img.at(x0, y0);
  double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
  double bottom = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
  return top + fy * (bottom - top);
}

namespace {

// x positions where the polygon boundary crosses the horizontal line at y, using the
// half-open rule on edge endpoints (lower y included, upper y excluded).
void scanline_crossings(const Polygon& poly, double y, std::vector<double>& xs) {
  xs.clear();
  const auto verts = poly.vertices();
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D& p = verts[i];
    const Point2D& q = verts[(i + 1) % n];
    if ((p.y <= y && y < q.y) || (q.y <= y && y < p.y)) {
      xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
  }
  std::sort(xs.begin(), xs.end());
}

}  // namespace

BinaryMask rasterize_polygon(const Polygon& poly, int width, int height) {
  BinaryMask mask(width, height);
  std::vector<double> xs;
  for (int j = 0; j < height; ++j) {
    scanline_crossings(poly, j, xs);
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      double lo = std::ceil(xs[k]);
      double hi = std::ceil(xs[k + 1]);
      int begin = static_cast<int>(std::clamp(lo, 0.0, static_cast<double>(width)));
      int end = static_cast<int>(std::clamp(hi, 0.0, static_cast<double>(width)));
      for (int i = begin; i < end; ++i) mask.set(i, j, true);
    }
  }
  return mask;
}

bool point_in_polygon(const Polygon& poly, Point2D p) {
  std::vector<double> xs;
  scanline_crossings(poly, p.y, xs);
  std::size_t left = 0;
  for (double x : xs) left += x <= p.x ? 1 : 0;
  return left % 2 == 1;
}

std::size_t mask_area(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count(mask.bits().begin(), mask.bits().end(), std::uint8_t{1}));
}

}  // namespace starcut
