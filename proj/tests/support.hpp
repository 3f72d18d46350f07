#pragma once

#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <system_error>

#include "starcut/imaging.hpp"

namespace testing_support {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("starcut_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline starcut::BinaryMask random_mask(std::mt19937& gen, int w, int h, double p) {
  std::bernoulli_distribution coin(p);
  starcut::BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, coin(gen));
  return m;
}

inline starcut::GrayImage random_image(std::mt19937& gen, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (auto& p : px) p = v(gen);
  return starcut::GrayImage(w, h, std::move(px));
}

}  // namespace testing_support
