#include "wavecomp/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "wavecomp/error.hpp"

namespace wavecomp {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError(ImageErrc::UnreadableImage, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space_and_comments();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1u << 30)) throw ImageError(ImageErrc::UnreadableImage, "PGM header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw ImageError(ImageErrc::UnreadableImage, "malformed PGM header");
    return v;
  }

  std::size_t pos_ = 0;
  std::span<const std::uint8_t> bytes_;
};

}  // namespace

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw ImageError(ImageErrc::UnreadableImage, "not a binary PGM (P5)");
  PnmReader r(bytes);
  r.pos_ = 2;
  const std::size_t w = r.number();
  const std::size_t h = r.number();
  const std::size_t maxval = r.number();
  if (w == 0 || h == 0) throw ImageError(ImageErrc::BadDimensions, "zero-sized PGM");
  if (maxval == 0 || maxval > 255)
    throw ImageError(ImageErrc::UnreadableImage, "only 8-bit PGM is supported");
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_]))
    throw ImageError(ImageErrc::UnreadableImage, "malformed PGM header");
  ++r.pos_;
  if (bytes.size() - r.pos_ < w * h) throw ImageError(ImageErrc::UnreadableImage, "PGM raster truncated");
  Image img(w, h);
  std::memcpy(img.data.data(), bytes.data() + r.pos_, w * h);
  return img;
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

Image read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(slurp(path));
  } catch (const ImageError& e) {
    throw ImageError(e.code(), path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError(ImageErrc::WriteFailure, "cannot write " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    throw ImageError(ImageErrc::UnreadableImage, path.string() + ": " + png.message);
  png.format = PNG_FORMAT_GRAY;
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    throw ImageError(ImageErrc::BadDimensions, path.string() + ": zero-sized PNG");
  }
  Image img(png.width, png.height);
  if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr)) {
    png_image_free(&png);
    throw ImageError(ImageErrc::UnreadableImage, path.string() + ": " + png.message);
  }
  return img;
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError(ImageErrc::UnreadableImage, "cannot open " + path.string());
  char sig[8] = {};
  in.read(sig, sizeof sig);
  if (in.gcount() >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  if (in.gcount() == 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(sig), 0, 8) == 0)
    return read_png(path);
  throw ImageError(ImageErrc::UnreadableImage, path.string() + ": neither PGM (P5) nor PNG");
}

Image resize_bilinear(const Image& src, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0 || src.empty())
    throw ImageError(ImageErrc::BadDimensions, "resize to or from an empty image");
  if (width == src.width && height == src.height) return src;
  Image dst(width, height);
  const double sx = static_cast<double>(src.width) / static_cast<double>(width);
  const double sy = static_cast<double>(src.height) / static_cast<double>(height);
  const auto max_x = static_cast<double>(src.width - 1);
  const auto max_y = static_cast<double>(src.height - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1 - wx) * src.at(x0, y0) + wx * src.at(x1, y0);
      const double bot = (1 - wx) * src.at(x0, y1) + wx * src.at(x1, y1);
      dst.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp((1 - wy) * top + wy * bot, 0.0, 255.0)));
    }
  }
  return dst;
}

}  // namespace wavecomp
