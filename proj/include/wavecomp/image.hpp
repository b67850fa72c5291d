#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace wavecomp {

// Row-major 2-D grid. Used for 8-bit images and integer wavelet coefficients.
template <typename T>
struct Grid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(std::size_t w, std::size_t h, T fill = T{}) : width(w), height(h), data(w * h, fill) {}

  T& at(std::size_t x, std::size_t y) { return data[y * width + x]; }
  const T& at(std::size_t x, std::size_t y) const { return data[y * width + x]; }
  std::span<T> row(std::size_t y) { return {data.data() + y * width, width}; }
  std::span<const T> row(std::size_t y) const { return {data.data() + y * width, width}; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

using Coefficient = std::int32_t;
using CoeffGrid = Grid<Coefficient>;

// 8-bit grayscale document image.
using Image = Grid<std::uint8_t>;

Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& img);
std::vector<std::uint8_t> encode_pgm(const Image& img);
Image decode_pgm(std::span<const std::uint8_t> bytes);

// Any PNG is converted to 8-bit gray (alpha stripped, 16-bit reduced).
Image read_png(const std::filesystem::path& path);

// Dispatches on file signature (P5 or PNG).
Image read_image(const std::filesystem::path& path);

Image resize_bilinear(const Image& src, std::size_t width, std::size_t height);

}  // namespace wavecomp
