#include <doctest.h>
#include <png.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "starcut/error.hpp"
#include "starcut/imaging.hpp"
#include "support.hpp"

using namespace starcut;
using testing_support::TempDir;

namespace {

// Crossing-number test written from scratch: counts edges crossed by a ray cast to +x.
bool franklin_inside(const std::vector<Point2D>& v, double px, double py) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > py) != (v[j].y > py)) {
      double xcross = (v[j].x - v[i].x) * (py - v[i].y) / (v[j].y - v[i].y) + v[i].x;
      if (px < xcross) inside = !inside;
    }
  }
  return inside;
}

double bilinear_oracle(const GrayImage& img, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  if (x0 == img.width() - 1) --x0;
  if (y0 == img.height() - 1) --y0;
  double a = x - x0;
  double b = y - y0;
  return (1 - a) * (1 - b) * img.at(x0, y0) + a * (1 - b) * img.at(x0 + 1, y0) +
         (1 - a) * b * img.at(x0, y0 + 1) + a * b * img.at(x0 + 1, y0 + 1);
}

std::string reason_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.reason();
  }
  return "";
}

Polygon circle(Point2D c, double r, int n) {
  std::vector<Point2D> v;
  for (int k = 0; k < n; ++k) {
    double t = 2.0 * std::numbers::pi * k / n;
    v.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
  }
  return Polygon(v);
}

}  // namespace

TEST_CASE("ascii PGM loads with the encoded values") {
  TempDir dir("img");
  {
    std::ofstream out(dir / "a.pgm");
    out << "P2\n# two by two\n2 2\n255\n0 10\n20 255\n";
  }
  GrayImage img = load_image(dir / "a.pgm");
  CHECK(img.width() == 2);
  CHECK(img.height() == 2);
  CHECK(img.at(0, 0) == 0);
  CHECK(img.at(1, 0) == 10);
  CHECK(img.at(0, 1) == 20);
  CHECK(img.at(1, 1) == 255);
  CHECK_FALSE(img.spacing_mm().has_value());
}

TEST_CASE("16-bit PGM is rejected as a format error") {
  TempDir dir("img");
  {
    std::ofstream out(dir / "deep.pgm");
    out << "P2\n1 1\n65535\n1000\n";
  }
  CHECK(reason_of([&] { load_image(dir / "deep.pgm"); }) == "format-error");
  CHECK(reason_of([&] { load_image(dir / "missing.pgm"); }) == "io-error");
  {
    std::ofstream out(dir / "junk.pgm");
    out << "P7\n";
  }
  CHECK(reason_of([&] { load_image(dir / "junk.pgm"); }) == "format-error");
}

TEST_CASE("mask save/load round trip over random masks") {
  TempDir dir("img");
  std::mt19937 gen(7);
  for (int k = 0; k < 100; ++k) {
    BinaryMask m = testing_support::random_mask(gen, 16, 16, 0.4);
    save_mask(m, dir / "m.pgm");
    CHECK(load_mask(dir / "m.pgm") == m);
  }
}

TEST_CASE("image save/load is bit identical and carries spacing through the sidecar") {
  TempDir dir("img");
  std::mt19937 gen(3);
  GrayImage img = testing_support::random_image(gen, 13, 9);
  save_image(img, dir / "i.pgm");
  save_metadata(dir / "i.pgm", 0.25);
  GrayImage back = load_image(dir / "i.pgm");
  REQUIRE(back.width() == 13);
  CHECK(std::equal(img.intensities().begin(), img.intensities().end(), back.intensities().begin()));
  REQUIRE(back.spacing_mm().has_value());
  CHECK(*back.spacing_mm() == 0.25);
  save_image(back, dir / "j.pgm");
  std::ifstream a(dir / "i.pgm", std::ios::binary), b(dir / "j.pgm", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("8-bit grayscale PNG loads; RGB PNG is rejected") {
  TempDir dir("img");
  std::vector<png_byte> gray = {0, 64, 128, 255, 7, 9};
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 3;
  img.height = 2;
  img.format = PNG_FORMAT_GRAY;
  REQUIRE(png_image_write_to_file(&img, (dir / "g.png").c_str(), 0, gray.data(), 0, nullptr));
  GrayImage loaded = load_image(dir / "g.png");
  CHECK(loaded.width() == 3);
  CHECK(loaded.height() == 2);
  CHECK(loaded.at(2, 0) == 128);
  CHECK(loaded.at(2, 1) == 9);

  std::vector<png_byte> rgb(3 * 2 * 3, 100);
  png_image color{};
  color.version = PNG_IMAGE_VERSION;
  color.width = 3;
  color.height = 2;
  color.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&color, (dir / "c.png").c_str(), 0, rgb.data(), 0, nullptr));
  CHECK(reason_of([&] { load_image(dir / "c.png"); }) == "format-error");
}

TEST_CASE("bilinear sampling") {
  GrayImage img(3, 3, std::vector<double>{0, 100, 0, 10, 20, 30, 40, 50, 60});
  CHECK(sample_bilinear(img, {1, 1}) == 20);
  CHECK(sample_bilinear(img, {0.5, 0}) == 50);
  CHECK(sample_bilinear(img, {2, 2}) == 60);
  CHECK(reason_of([&] { sample_bilinear(img, {2.01, 1}); }) == "out-of-bounds");
  CHECK(reason_of([&] { sample_bilinear(img, {-0.01, 1}); }) == "out-of-bounds");

  std::mt19937 gen(11);
  GrayImage rnd = testing_support::random_image(gen, 17, 12);
  std::uniform_real_distribution<double> ux(0, 16), uy(0, 11);
  for (int k = 0; k < 100; ++k) {
    double x = ux(gen), y = uy(gen);
    CHECK(std::abs(sample_bilinear(rnd, {x, y}) - bilinear_oracle(rnd, x, y)) <= 1e-9);
  }
}

TEST_CASE("rasterization matches the conventions") {
  Polygon square({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  BinaryMask sq = rasterize_polygon(square, 20, 20);
  CHECK(mask_area(sq) == 100);
  CHECK(sq.at(0, 0));
  CHECK(sq.at(9, 9));
  CHECK_FALSE(sq.at(10, 5));
  CHECK_FALSE(sq.at(5, 10));

  Polygon outside({{30, 30}, {40, 30}, {35, 40}});
  CHECK(mask_area(rasterize_polygon(outside, 20, 20)) == 0);

  BinaryMask disk = rasterize_polygon(circle({50, 50}, 30, 64), 100, 100);
  const double area = std::numbers::pi * 30 * 30;
  CHECK(std::abs(static_cast<double>(mask_area(disk)) - area) / area < 0.02);

  CHECK(reason_of([] { Polygon({{0, 0}, {1, 1}}); }) == "invalid-polygon");
}

TEST_CASE("rasterization equals a per-pixel crossing-number oracle on random polygons") {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> nv(3, 12);
  std::uniform_real_distribution<double> coord(-5, 35);
  std::uniform_int_distribution<int> icoord(-2, 32);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2D> v;
    int n = nv(gen);
    // Half the polygons use integer vertices so pixel centers land exactly on edges.
    for (int k = 0; k < n; ++k) {
      if (trial % 2) v.push_back({static_cast<double>(icoord(gen)), static_cast<double>(icoord(gen))});
      else v.push_back({coord(gen), coord(gen)});
    }
    bool distinct = true;
    for (int k = 0; k < n; ++k) distinct = distinct && !(v[k] == v[(k + 1) % n]);
    if (!distinct) continue;
    Polygon poly(v);
    BinaryMask m = rasterize_polygon(poly, 30, 30);
    std::size_t count = 0;
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 30; ++x) {
        const bool expect = franklin_inside(v, x, y);
        CHECK(m.at(x, y) == expect);
        CHECK(point_in_polygon(poly, {static_cast<double>(x), static_cast<double>(y)}) == expect);
        count += expect;
      }
    }
    CHECK(mask_area(m) == count);
  }
}

TEST_CASE("integer translation of a polygon translates its raster") {
  Polygon base = circle({20.3, 18.7}, 9.4, 23);
  std::vector<Point2D> moved;
  for (auto p : base.vertices()) moved.push_back({p.x + 7, p.y + 4});
  BinaryMask a = rasterize_polygon(base, 50, 50);
  BinaryMask b = rasterize_polygon(Polygon(moved), 50, 50);
  for (int y = 0; y < 46; ++y)
    for (int x = 0; x < 43; ++x) CHECK(a.at(x, y) == b.at(x + 7, y + 4));
}

TEST_CASE("mask area") {
  CHECK(mask_area(BinaryMask(8, 8, false)) == 0);
  CHECK(mask_area(BinaryMask(8, 8, true)) == 64);
  std::mt19937 gen(1);
  BinaryMask m = testing_support::random_mask(gen, 23, 17, 0.3);
  std::size_t count = 0;
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 23; ++x) count += m.at(x, y) ? 1 : 0;
  CHECK(mask_area(m) == count);
}

TEST_CASE("invalid images are rejected") {
  CHECK(reason_of([] { GrayImage(2, 2, std::vector<double>{0, 1, 2}); }) == "invalid-image");
  CHECK(reason_of([] { GrayImage(1, 1, std::vector<double>{256}); }) == "invalid-image");
  CHECK(reason_of([] { GrayImage(0, 1, 0.0); }) == "invalid-image");
}
