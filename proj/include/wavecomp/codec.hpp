#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wavecomp/image.hpp"
#include "wavecomp/wavelet.hpp"

namespace wavecomp {

inline constexpr std::size_t kCodeBlockSize = 16;
inline constexpr std::uint16_t kStreamVersion = 1;
inline constexpr std::array<std::uint8_t, 4> kStreamMagic = {'W', 'C', 'P', 'C'};
inline constexpr std::size_t kFixedHeaderBytes = 18;  // through packet_count

// Magnitudes must stay below 2^31 (31 bit-planes).
inline constexpr std::int64_t kMaxBlockMagnitude = (std::int64_t{1} << 31) - 1;

// ---------------------------------------------------------------------------
// Block coder. Layout of a payload:
//   u8 P                      number of magnitude bit-planes (0 => done)
//   plane(sign)               1 where the coefficient is negative
//   plane(P-1) .. plane(0)    magnitude bits, MSB first
// Each plane is w*h bits in raster order, coded as tokens:
//   0x00..0x7F  run of (t + 1) zero bits
//   0x80..0xFF  7 literal bits, MSB first; short tail padded with zeros
// ---------------------------------------------------------------------------
std::vector<std::uint8_t> encode_block(const CoeffGrid& coeffs);
CoeffGrid decode_block(std::span<const std::uint8_t> payload, std::size_t width, std::size_t height);

enum class BandKind : std::uint8_t { LL, HL, LH, HH };

struct SubbandId {
  BandKind kind = BandKind::LL;
  int depth = 0;
  friend bool operator==(SubbandId, SubbandId) = default;
};

struct CodeBlock {
  SubbandId band;
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> payload;
  std::size_t coeff_count() const { return width * height; }
};

// Resolution increment r: r = 1 carries LL at depth D, r > 1 the detail
// triplet at depth D - r + 2.
struct Packet {
  int resolution = 1;
  std::vector<CodeBlock> blocks;
  // Serialized size: every block contributes u16 length + payload.
  std::size_t byte_length() const;
};

struct StreamHeader {
  std::uint16_t version = kStreamVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int levels = 0;
  int codeblock_size = static_cast<int>(kCodeBlockSize);
  std::vector<std::uint32_t> packet_lengths;

  std::size_t header_bytes() const { return kFixedHeaderBytes + 4 * packet_lengths.size(); }
  std::size_t total_bytes() const;
  // Offset of packet r (1-based) from the start of the stream.
  std::size_t packet_offset(int r) const;
};

// Packets in stream order (r = 1 .. D + 1) for a pyramid.
std::vector<Packet> packetize(const SubbandPyramid& pyramid);

// Lossless, resolution-major codestream.
std::vector<std::uint8_t> encode(const Image& image, int levels = kDefaultLevels);
std::vector<std::uint8_t> encode_pyramid(const SubbandPyramid& pyramid);

// Parses and validates the header only.
StreamHeader read_header(std::span<const std::uint8_t> stream);

Image decode_full(std::span<const std::uint8_t> stream);

struct PartialDecode {
  CoeffGrid ll;
  std::size_t bytes_read = 0;
};

// LL at resolution r. Reads only the header and packets 1..r; the span may
// be a truncated copy ending right after packet r.
PartialDecode decode_partial(std::span<const std::uint8_t> stream, ResolutionLevel r);

// Coefficients of the first `packet_count` packets; untouched detail bands
// are left empty.
SubbandPyramid decode_packets(std::span<const std::uint8_t> stream, int packet_count);

struct StreamSummary {
  StreamHeader header;
  std::size_t file_bytes = 0;
  std::size_t packet_count() const { return header.packet_lengths.size(); }
};

StreamSummary inspect(std::span<const std::uint8_t> stream);

std::vector<std::uint8_t> read_stream_file(const std::filesystem::path& path);
void write_stream_file(const std::filesystem::path& path, std::span<const std::uint8_t> stream);

}  // namespace wavecomp
