#pragma once

#include <filesystem>
#include <string>
#include <system_error>

#include <unistd.h>

#include "wavecomp/image.hpp"
#include "wavecomp/rng.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    wavecomp::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() / ("wavecomp_" + tag + "_" + std::to_string(rng() % 1000000007));
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
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline wavecomp::Image noise_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  wavecomp::Rng rng(seed);
  wavecomp::Image img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(wavecomp::uniform_index(rng, 256));
  return img;
}

inline wavecomp::Image constant_image(std::size_t w, std::size_t h, std::uint8_t v) { return wavecomp::Image(w, h, v); }

// Light page with solid dark word boxes on regular text lines.
inline wavecomp::Image document_like(std::size_t w, std::size_t h, std::uint64_t seed) {
  wavecomp::Rng rng(seed);
  wavecomp::Image img(w, h, 240);
  for (std::size_t y = 6; y + 10 < h; y += 12) {
    std::size_t x = 4;
    while (x + 4 < w) {
      const std::size_t len = 3 + wavecomp::uniform_index(rng, 20);
      for (std::size_t yy = y; yy < y + 6; ++yy)
        for (std::size_t xx = x; xx < std::min(w - 4, x + len); ++xx) img.at(xx, yy) = 40;
      x += len + 3 + wavecomp::uniform_index(rng, 4);
    }
  }
  return img;
}

}  // namespace testing
