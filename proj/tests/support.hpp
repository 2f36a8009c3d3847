#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "cmrqa/image.hpp"

namespace cmrqa::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "cmrqa_" + tag;
    if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline SliceImage random_image(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -100,
                               double hi = 100) {
  std::uniform_real_distribution<double> u(lo, hi);
  SliceImage img(rows, cols);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

// Multiples of 1/1024 in [-64, 64]: sums of a few such values are exact in
// double precision, so differently ordered arithmetic agrees bit for bit.
inline SliceImage dyadic_image(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<int> u(-65536, 65536);
  SliceImage img(rows, cols);
  for (auto& v : img.values()) v = u(rng) / 1024.0;
  return img;
}

}  // namespace cmrqa::test
