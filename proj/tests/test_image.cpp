#include <doctest.h>

#include <png.h>

#include <fstream>
#include <functional>
#include <algorithm>

#include "support.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/image.hpp"

using namespace wavecomp;

namespace {

void write_raw(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

ImageErrc image_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const ImageError& e) {
    return e.code();
  }
  FAIL("expected an ImageError");
  return ImageErrc::WriteFailure;
}

}  // namespace

TEST_CASE("PGM encode/decode round trip") {
  const auto img = testing::noise_image(13, 7, 1);
  const auto bytes = encode_pgm(img);
  const std::string head(bytes.begin(), bytes.begin() + 11);
  CHECK(head == "P5\n13 7\n255");
  CHECK(decode_pgm(bytes) == img);
}

TEST_CASE("PGM header with comments and odd whitespace") {
  std::string s = "P5 # comment\n# another\n 3\t2\n255\n";
  s += std::string("\x01\x02\x03\x04\x05\x06", 6);
  const auto img = decode_pgm(std::vector<std::uint8_t>(s.begin(), s.end()));
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.at(2, 1) == 6);
}

TEST_CASE("PGM rejections") {
  auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  CHECK(image_code([&] { decode_pgm(bytes("P2\n1 1\n255\n0")); }) == ImageErrc::UnreadableImage);
  CHECK(image_code([&] { decode_pgm(bytes("P5\n2 2\n65535\n")); }) == ImageErrc::UnreadableImage);
  CHECK(image_code([&] { decode_pgm(bytes("P5\n0 2\n255\n")); }) == ImageErrc::BadDimensions);
  CHECK(image_code([&] { decode_pgm(bytes("P5\n2 2\n255\nabc")); }) == ImageErrc::UnreadableImage);
}

TEST_CASE("files: PGM, PNG and signature dispatch") {
  testing::TempDir dir("image");
  const auto img = testing::noise_image(20, 11, 5);
  write_pgm(dir / "a.pgm", img);
  CHECK(read_pgm(dir / "a.pgm") == img);
  CHECK(read_image(dir / "a.pgm") == img);

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = 20;
  png.height = 11;
  png.format = PNG_FORMAT_GRAY;
  REQUIRE(png_image_write_to_file(&png, (dir / "b.png").c_str(), 0, img.data.data(), 0, nullptr));
  CHECK(read_png(dir / "b.png") == img);
  CHECK(read_image(dir / "b.png") == img);

  // RGB PNG is converted to gray.
  std::vector<std::uint8_t> rgb(20 * 11 * 3);
  for (std::size_t i = 0; i < img.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = img.data[i];
  png_image color{};
  color.version = PNG_IMAGE_VERSION;
  color.width = 20;
  color.height = 11;
  color.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&color, (dir / "c.png").c_str(), 0, rgb.data(), 0, nullptr));
  const auto gray = read_image(dir / "c.png");
  CHECK(gray.width == 20);
  CHECK(gray.height == 11);

  write_raw(dir / "junk.png", "not an image");
  CHECK(image_code([&] { read_image(dir / "junk.png"); }) == ImageErrc::UnreadableImage);
  CHECK(image_code([&] { read_image(dir / "missing.pgm"); }) == ImageErrc::UnreadableImage);
  CHECK(image_code([&] { write_pgm(dir / "none/x.pgm", img); }) == ImageErrc::WriteFailure);
}

TEST_CASE("bilinear resize") {
  const auto c = testing::constant_image(10, 6, 90);
  const auto r = resize_bilinear(c, 7, 13);
  CHECK(r.width == 7);
  CHECK(r.height == 13);
  for (auto v : r.data) CHECK(v == 90);
  const auto img = testing::noise_image(9, 9, 2);
  CHECK(resize_bilinear(img, 9, 9) == img);
  // 2x upsample of a two-pixel ramp stays within the endpoints.
  Image ramp(2, 1);
  ramp.data = {0, 200};
  const auto up = resize_bilinear(ramp, 4, 1);
  CHECK(up.data.front() == 0);
  CHECK(up.data.back() == 200);
  CHECK(std::is_sorted(up.data.begin(), up.data.end()));
}
