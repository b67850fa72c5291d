#include <bit>
#include <cstdlib>
#include <string>

#include "wavecomp/codec.hpp"
#include "wavecomp/error.hpp"

namespace wavecomp {

namespace {

constexpr std::size_t kMaxRun = 128;
constexpr std::size_t kLiteralBits = 7;
constexpr int kMaxPlanes = 31;

[[noreturn]] void corrupt(const std::string& why) { throw CodecError(CodecErrc::CorruptBlock, why); }

template <typename BitAt>
void code_plane(std::size_t n, BitAt bit, std::vector<std::uint8_t>& out) {
  std::size_t i = 0;
  while (i < n) {
    std::size_t zeros = 0;
    while (i + zeros < n && !bit(i + zeros) && zeros < kMaxRun) ++zeros;
    if (zeros >= 8 || (zeros > 0 && i + zeros == n)) {
      out.push_back(static_cast<std::uint8_t>(zeros - 1));
      i += zeros;
      continue;
    }
    std::uint8_t token = 0x80;
    for (std::size_t k = 0; k < kLiteralBits; ++k) {
      if (i + k < n && bit(i + k)) token |= static_cast<std::uint8_t>(1u << (kLiteralBits - 1 - k));
    }
    out.push_back(token);
    i += std::min(kLiteralBits, n - i);
  }
}

class PlaneReader {
 public:
  explicit PlaneReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Calls set(i) for every 1-bit of the next plane of n bits.
  template <typename Set>
  void read(std::size_t n, Set set) {
    std::size_t i = 0;
    while (i < n) {
      if (pos_ >= bytes_.size()) corrupt("payload ends inside a bit-plane");
      const std::uint8_t t = bytes_[pos_++];
      if (t < 0x80) {
        const std::size_t run = std::size_t{t} + 1;
        if (i + run > n) corrupt("zero run overruns the bit-plane");
        i += run;
        continue;
      }
      const std::size_t take = std::min(kLiteralBits, n - i);
      for (std::size_t k = 0; k < kLiteralBits; ++k) {
        const bool b = (t >> (kLiteralBits - 1 - k)) & 1u;
        if (!b) continue;
        if (k >= take) corrupt("nonzero padding in literal token");
        set(i + k);
      }
      i += take;
    }
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_block(const CoeffGrid& coeffs) {
  const std::size_t n = coeffs.width * coeffs.height;
  if (coeffs.width > kCodeBlockSize || coeffs.height > kCodeBlockSize || coeffs.data.size() != n)
    throw CodecError(CodecErrc::CorruptBlock,
                     "block " + std::to_string(coeffs.width) + "x" + std::to_string(coeffs.height) +
                         " exceeds the code-block size");
  std::uint32_t magnitudes[kCodeBlockSize * kCodeBlockSize];
  std::uint32_t all = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t v = coeffs.data[i];
    const std::int64_t m = v < 0 ? -v : v;
    if (m > kMaxBlockMagnitude) throw CodecError(CodecErrc::CorruptBlock, "coefficient magnitude exceeds 2^31 - 1");
    magnitudes[i] = static_cast<std::uint32_t>(m);
    all |= magnitudes[i];
  }
  const int planes = static_cast<int>(std::bit_width(all));
  std::vector<std::uint8_t> out;
  out.reserve(8);
  out.push_back(static_cast<std::uint8_t>(planes));
  if (planes == 0) return out;
  code_plane(n, [&](std::size_t i) { return coeffs.data[i] < 0; }, out);
  for (int b = planes - 1; b >= 0; --b)
    code_plane(n, [&](std::size_t i) { return ((magnitudes[i] >> b) & 1u) != 0; }, out);
  return out;
}

CoeffGrid decode_block(std::span<const std::uint8_t> payload, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0 || width > kCodeBlockSize || height > kCodeBlockSize)
    corrupt("invalid block dimensions");
  if (payload.empty()) corrupt("empty payload");
  const int planes = payload[0];
  if (planes > kMaxPlanes) corrupt("bit-plane count " + std::to_string(planes) + " exceeds 31");
  const std::size_t n = width * height;
  CoeffGrid out(width, height);
  if (planes == 0) {
    if (payload.size() != 1) corrupt("trailing bytes after an all-zero block");
    return out;
  }
  bool negative[kCodeBlockSize * kCodeBlockSize] = {};
  std::uint32_t magnitudes[kCodeBlockSize * kCodeBlockSize] = {};
  PlaneReader reader(payload.subspan(1));
  reader.read(n, [&](std::size_t i) { negative[i] = true; });
  for (int b = planes - 1; b >= 0; --b)
    reader.read(n, [&](std::size_t i) { magnitudes[i] |= 1u << b; });
  if (1 + reader.position() != payload.size()) corrupt("trailing bytes after the last bit-plane");
  std::uint32_t all = 0;
  for (std::size_t i = 0; i < n; ++i) {
    all |= magnitudes[i];
    if (negative[i] && magnitudes[i] == 0) corrupt("sign set on a zero coefficient");
    const auto m = static_cast<std::int64_t>(magnitudes[i]);
    out.data[i] = static_cast<Coefficient>(negative[i] ? -m : m);
  }
  if (static_cast<int>(std::bit_width(all)) != planes) corrupt("most significant bit-plane is empty");
  return out;
}

}  // namespace wavecomp
