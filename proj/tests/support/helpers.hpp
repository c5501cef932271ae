#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "mra/error.hpp"
#include "mra/image.hpp"
#include "mra/random.hpp"

#define CHECK_ERROR_KIND(expr, expected_kind)                         \
  do {                                                                \
    bool mra_thrown_ = false;                                         \
    try {                                                             \
      (void)(expr);                                                   \
    } catch (const ::mra::Error& e) {                                 \
      mra_thrown_ = true;                                             \
      CHECK_MESSAGE(e.kind() == (expected_kind), e.what());           \
    }                                                                 \
    CHECK_MESSAGE(mra_thrown_, "expected mra::Error from " #expr);    \
  } while (false)

namespace mra::test {

inline Image random_image(Rng& rng, int h, int w, int c) {
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image img(h, w, c);
  for (Eigen::Index i = 0; i < img.pixels().size(); ++i) img.pixels()[i] = dist(rng);
  return img;
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("mra_" + name + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

}  // namespace mra::test
