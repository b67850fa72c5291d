#include "wavecomp/codec.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"

namespace wavecomp {

namespace {

struct BandGeometry {
  SubbandId id;
  Extent extent;
};

struct BlockRef {
  std::size_t band = 0;  // index into the packet's band list
  std::size_t x0 = 0, y0 = 0, width = 0, height = 0;
};

// Subbands carried by packet r of a D-level stream, in stream order.
std::vector<BandGeometry> packet_bands(Extent base, int levels, int r) {
  if (r == 1) return {{{BandKind::LL, levels}, ll_extent(base, levels)}};
  const int depth = levels - r + 2;
  const Extent parent = ll_extent(base, depth - 1);
  const Extent lo{low_extent(parent.width), low_extent(parent.height)};
  const Extent hi{high_extent(parent.width), high_extent(parent.height)};
  return {{{BandKind::HL, depth}, {hi.width, lo.height}},
          {{BandKind::LH, depth}, {lo.width, hi.height}},
          {{BandKind::HH, depth}, {hi.width, hi.height}}};
}

std::vector<BlockRef> tile_blocks(const std::vector<BandGeometry>& bands) {
  std::vector<BlockRef> out;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const Extent e = bands[b].extent;
    for (std::size_t y = 0; y < e.height; y += kCodeBlockSize)
      for (std::size_t x = 0; x < e.width; x += kCodeBlockSize)
        out.push_back({b, x, y, std::min(kCodeBlockSize, e.width - x), std::min(kCodeBlockSize, e.height - y)});
  }
  return out;
}

const CoeffGrid& band_of(const SubbandPyramid& p, SubbandId id) {
  if (id.kind == BandKind::LL) return p.ll;
  const DetailBands& d = p.at_depth(id.depth);
  return id.kind == BandKind::HL ? d.hl : id.kind == BandKind::LH ? d.lh : d.hh;
}

CoeffGrid& band_of(SubbandPyramid& p, SubbandId id) {
  return const_cast<CoeffGrid&>(band_of(static_cast<const SubbandPyramid&>(p), id));
}

CoeffGrid extract(const CoeffGrid& band, const BlockRef& b) {
  CoeffGrid out(b.width, b.height);
  for (std::size_t y = 0; y < b.height; ++y)
    std::copy_n(band.row(b.y0 + y).data() + b.x0, b.width, out.row(y).data());
  return out;
}

void insert(CoeffGrid& band, const BlockRef& b, const CoeffGrid& block) {
  for (std::size_t y = 0; y < b.height; ++y)
    std::copy_n(block.row(y).data(), b.width, band.row(b.y0 + y).data() + b.x0);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[pos + i]) << (8 * i));
  return v;
}

// Runs fn(i) for i in [0, n) across workers; the first exception (lowest
// index) is rethrown after the loop.
template <typename Fn>
void parallel_blocks(std::size_t n, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  const int threads = worker_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (n > 16)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::size_t Packet::byte_length() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += 2 + b.payload.size();
  return n;
}

std::size_t StreamHeader::total_bytes() const {
  std::size_t n = header_bytes();
  for (auto len : packet_lengths) n += len;
  return n;
}

std::size_t StreamHeader::packet_offset(int r) const {
  std::size_t off = header_bytes();
  for (int i = 1; i < r; ++i) off += packet_lengths[static_cast<std::size_t>(i - 1)];
  return off;
}

std::vector<Packet> packetize(const SubbandPyramid& pyramid) {
  validate_pyramid(pyramid);
  const Extent base{pyramid.base_width, pyramid.base_height};
  const int packet_count = pyramid.levels + 1;

  struct Job {
    int packet;
    SubbandId band;
    BlockRef ref;
  };
  std::vector<Job> jobs;
  for (int r = 1; r <= packet_count; ++r) {
    const auto bands = packet_bands(base, pyramid.levels, r);
    for (const auto& ref : tile_blocks(bands)) jobs.push_back({r, bands[ref.band].id, ref});
  }

  std::vector<std::vector<std::uint8_t>> payloads(jobs.size());
  parallel_blocks(jobs.size(), [&](std::size_t i) {
    payloads[i] = encode_block(extract(band_of(pyramid, jobs[i].band), jobs[i].ref));
  });

  std::vector<Packet> packets(static_cast<std::size_t>(packet_count));
  for (int r = 1; r <= packet_count; ++r) packets[static_cast<std::size_t>(r - 1)].resolution = r;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& j = jobs[i];
    packets[static_cast<std::size_t>(j.packet - 1)].blocks.push_back(
        {j.band, j.ref.x0, j.ref.y0, j.ref.width, j.ref.height, std::move(payloads[i])});
  }
  return packets;
}

std::vector<std::uint8_t> encode_pyramid(const SubbandPyramid& pyramid) {
  const auto packets = packetize(pyramid);
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kStreamMagic.begin(), kStreamMagic.end());
  put_le<std::uint16_t>(out, kStreamVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(pyramid.base_width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(pyramid.base_height));
  out.push_back(static_cast<std::uint8_t>(pyramid.levels));
  out.push_back(static_cast<std::uint8_t>(kCodeBlockSize));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(packets.size()));
  for (const auto& p : packets) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.byte_length()));
  for (const auto& p : packets) {
    for (const auto& b : p.blocks) {
      put_le<std::uint16_t>(out, static_cast<std::uint16_t>(b.payload.size()));
      out.insert(out.end(), b.payload.begin(), b.payload.end());
    }
  }
  return out;
}

std::vector<std::uint8_t> encode(const Image& image, int levels) {
  if (image.width > std::numeric_limits<std::uint32_t>::max() ||
      image.height > std::numeric_limits<std::uint32_t>::max())
    throw WaveletError(WaveletErrc::ShapeMismatch, "image extent exceeds 32 bits");
  return encode_pyramid(forward_dwt(image, levels));
}

StreamHeader read_header(std::span<const std::uint8_t> stream) {
  if (stream.size() < kStreamMagic.size() || !std::equal(kStreamMagic.begin(), kStreamMagic.end(), stream.begin()))
    throw CodecError(CodecErrc::BadMagic, "stream does not start with \"WCPC\"", 0);
  if (stream.size() < kFixedHeaderBytes)
    throw CodecError(CodecErrc::TruncatedStream, "header is truncated (packet 0)", 0);
  StreamHeader h;
  h.version = get_le<std::uint16_t>(stream, 4);
  if (h.version != kStreamVersion)
    throw CodecError(CodecErrc::UnsupportedVersion, "stream version " + std::to_string(h.version), 0);
  h.width = get_le<std::uint32_t>(stream, 6);
  h.height = get_le<std::uint32_t>(stream, 10);
  h.levels = stream[14];
  h.codeblock_size = stream[15];
  const auto count = get_le<std::uint16_t>(stream, 16);
  if (h.codeblock_size != static_cast<int>(kCodeBlockSize))
    throw CodecError(CodecErrc::UnsupportedVersion,
                     "code-block size " + std::to_string(h.codeblock_size) + " (only 16 is supported)", 0);
  try {
    validate_levels({h.width, h.height}, h.levels);
  } catch (const WaveletError& e) {
    throw CodecError(CodecErrc::CorruptHeader, e.what(), 0);
  }
  if (count != h.levels + 1)
    throw CodecError(CodecErrc::CorruptHeader,
                     std::to_string(count) + " packets declared for " + std::to_string(h.levels) + " levels", 0);
  if (stream.size() < kFixedHeaderBytes + 4u * count)
    throw CodecError(CodecErrc::TruncatedStream, "packet length table is truncated (packet 0)", 0);
  h.packet_lengths.resize(count);
  for (std::size_t i = 0; i < count; ++i) h.packet_lengths[i] = get_le<std::uint32_t>(stream, kFixedHeaderBytes + 4 * i);
  return h;
}

SubbandPyramid decode_packets(std::span<const std::uint8_t> stream, int packet_count) {
  const StreamHeader h = read_header(stream);
  const Extent base{h.width, h.height};
  if (packet_count < 1 || packet_count > h.levels + 1)
    throw CodecError(CodecErrc::BadResolution, "packet count " + std::to_string(packet_count) + " out of range");

  SubbandPyramid p;
  p.levels = h.levels;
  p.base_width = h.width;
  p.base_height = h.height;
  p.details.resize(static_cast<std::size_t>(h.levels));

  struct Job {
    int packet;
    int index;
    SubbandId band;
    BlockRef ref;
    std::span<const std::uint8_t> payload;
  };
  std::vector<Job> jobs;
  for (int r = 1; r <= packet_count; ++r) {
    const std::size_t offset = h.packet_offset(r);
    const std::size_t length = h.packet_lengths[static_cast<std::size_t>(r - 1)];
    if (stream.size() < offset || stream.size() - offset < length)
      throw CodecError(CodecErrc::TruncatedStream,
                       "stream ends inside packet " + std::to_string(r) + " (" + std::to_string(stream.size()) +
                           " of " + std::to_string(offset + length) + " bytes)",
                       r);
    const auto body = stream.subspan(offset, length);
    const auto bands = packet_bands(base, h.levels, r);
    for (const auto& g : bands) band_of(p, g.id) = CoeffGrid(g.extent.width, g.extent.height);
    const auto refs = tile_blocks(bands);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const int index = static_cast<int>(i);
      if (body.size() - pos < 2)
        throw CodecError(CodecErrc::CorruptBlock,
                         "packet " + std::to_string(r) + " block " + std::to_string(i) + ": missing length", r, index);
      const std::size_t len = get_le<std::uint16_t>(body, pos);
      pos += 2;
      if (body.size() - pos < len)
        throw CodecError(CodecErrc::CorruptBlock,
                         "packet " + std::to_string(r) + " block " + std::to_string(i) + ": payload overruns packet",
                         r, index);
      jobs.push_back({r, index, bands[refs[i].band].id, refs[i], body.subspan(pos, len)});
      pos += len;
    }
    if (pos != body.size())
      throw CodecError(CodecErrc::CorruptBlock,
                       "packet " + std::to_string(r) + ": " + std::to_string(body.size() - pos) + " trailing bytes", r);
  }

  parallel_blocks(jobs.size(), [&](std::size_t i) {
    const auto& j = jobs[i];
    CoeffGrid block;
    try {
      block = decode_block(j.payload, j.ref.width, j.ref.height);
    } catch (const CodecError& e) {
      throw CodecError(CodecErrc::CorruptBlock,
                       "packet " + std::to_string(j.packet) + " block " + std::to_string(j.index) + ": " + e.what(),
                       j.packet, j.index);
    }
    insert(band_of(p, j.band), j.ref, block);
  });
  return p;
}

namespace {

void reject_trailing(const StreamHeader& h, std::size_t size) {
  if (size > h.total_bytes())
    throw CodecError(CodecErrc::CorruptHeader,
                     std::to_string(size - h.total_bytes()) + " bytes follow the last packet", h.levels + 1);
}

}  // namespace

Image decode_full(std::span<const std::uint8_t> stream) {
  const StreamHeader h = read_header(stream);
  reject_trailing(h, stream.size());
  const SubbandPyramid p = decode_packets(stream, h.levels + 1);
  try {
    return inverse_dwt(p);
  } catch (const WaveletError& e) {
    throw CodecError(CodecErrc::CorruptBlock, e.what());
  }
}

PartialDecode decode_partial(std::span<const std::uint8_t> stream, ResolutionLevel r) {
  const StreamHeader h = read_header(stream);
  if (r.value < 1 || r.value > h.levels)
    throw CodecError(CodecErrc::BadResolution,
                     "resolution " + std::to_string(r.value) + " outside [1, " + std::to_string(h.levels) + "]");
  SubbandPyramid p = decode_packets(stream, r.value);
  const Extent base{h.width, h.height};
  const int target = resolution_depth(h.levels, r);
  CoeffGrid current = std::move(p.ll);
  for (int d = h.levels; d > target; --d) {
    const Extent parent = ll_extent(base, d - 1);
    current = synthesize_level(current, p.at_depth(d), parent.width, parent.height);
  }
  return {std::move(current), h.packet_offset(r.value + 1)};
}

StreamSummary inspect(std::span<const std::uint8_t> stream) {
  StreamHeader h = read_header(stream);
  reject_trailing(h, stream.size());
  return {std::move(h), stream.size()};
}

std::vector<std::uint8_t> read_stream_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodecError(CodecErrc::TruncatedStream, "cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_stream_file(const std::filesystem::path& path, std::span<const std::uint8_t> stream) {
  std::ofstream out(path, std::ios::binary);
  if (out) out.write(reinterpret_cast<const char*>(stream.data()), static_cast<std::streamsize>(stream.size()));
  if (!out) throw CodecError(CodecErrc::StreamWriteFailure, "cannot write " + path.string());
}

}  // namespace wavecomp
