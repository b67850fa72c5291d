#include <cstring>
#include <fstream>
#include <iterator>

#include "wavecomp/error.hpp"
#include "wavecomp/model.hpp"

namespace wavecomp::nn {

namespace {

constexpr char kMagic[4] = {'W', 'C', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

class Writer {
 public:
  template <typename U>
  void put(U v) {
    if constexpr (std::is_floating_point_v<U>) {
      using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t, std::uint32_t>;
      Bits b;
      std::memcpy(&b, &v, sizeof b);
      put(b);
    } else {
      for (std::size_t i = 0; i < sizeof(U); ++i) bytes.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> data) : bytes_(std::move(data)) {}

  template <typename U>
  U get() {
    if constexpr (std::is_floating_point_v<U>) {
      using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t, std::uint32_t>;
      const Bits b = get<Bits>();
      U v;
      std::memcpy(&v, &b, sizeof v);
      return v;
    } else {
      need(sizeof(U));
      std::uint64_t v = 0;
      for (std::size_t i = 0; i < sizeof(U); ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
      pos_ += sizeof(U);
      return static_cast<U>(v);
    }
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw NnError(NnErrc::BadCheckpoint, "checkpoint is truncated");
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos_ = 0;

 private:
  std::vector<std::uint8_t> bytes_;
};

void put_spec(Writer& w, const LayerSpec& l) {
  w.put<std::uint8_t>(static_cast<std::uint8_t>(l.kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(l.kernel));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(l.in_channels));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(l.out_channels));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(l.stride));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(l.padding));
  w.put<double>(l.dropout_rate);
}

LayerSpec get_spec(Reader& r) {
  LayerSpec l;
  const auto kind = r.get<std::uint8_t>();
  if (kind < 1 || kind > 7) throw NnError(NnErrc::BadCheckpoint, "unknown layer kind " + std::to_string(kind));
  l.kind = static_cast<LayerKind>(kind);
  l.kernel = r.get<std::uint32_t>();
  l.in_channels = r.get<std::uint32_t>();
  l.out_channels = r.get<std::uint32_t>();
  l.stride = r.get<std::uint32_t>();
  l.padding = r.get<std::uint32_t>();
  l.dropout_rate = r.get<double>();
  return l;
}

template <typename Stored, typename T>
void read_values(Reader& r, Tensor<T>& t) {
  for (auto& v : t.values()) v = static_cast<T>(r.get<Stored>());
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, Model<T>& model, const CheckpointMeta& meta) {
  Writer w;
  w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint8_t>(sizeof(T));
  const ModelSpec& spec = model.spec();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.input_height));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.input_width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.input_channels));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.layers.size()));
  for (const auto& l : spec.layers) put_spec(w, l);
  w.put<std::int32_t>(meta.resolution);
  w.put<std::int32_t>(meta.levels);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(meta.classes.size()));
  for (const auto& c : meta.classes) w.put_string(c);
  for (const auto& p : model.params()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.value->rank()));
    for (auto d : p.value->shape()) w.put<std::uint64_t>(d);
    for (auto v : p.value->values()) w.put<T>(v);
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw NnError(NnErrc::BadCheckpoint, "cannot write " + path.string());
}

template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NnError(NnErrc::BadCheckpoint, "cannot open " + path.string());
  Reader r({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
  r.need(4);
  for (char c : kMagic)
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(c))
      throw NnError(NnErrc::BadCheckpoint, path.string() + ": bad magic");
  if (r.get<std::uint16_t>() != kVersion) throw NnError(NnErrc::BadCheckpoint, path.string() + ": unsupported version");
  const auto scalar = r.get<std::uint8_t>();
  if (scalar != 4 && scalar != 8) throw NnError(NnErrc::BadCheckpoint, path.string() + ": bad scalar width");
  ModelSpec spec;
  spec.input_height = r.get<std::uint32_t>();
  spec.input_width = r.get<std::uint32_t>();
  spec.input_channels = r.get<std::uint32_t>();
  const auto n_layers = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_layers; ++i) spec.layers.push_back(get_spec(r));
  CheckpointMeta meta;
  meta.resolution = r.get<std::int32_t>();
  meta.levels = r.get<std::int32_t>();
  const auto n_classes = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_classes; ++i) meta.classes.push_back(r.get_string());

  LoadedCheckpoint<T> out{Model<T>(spec, 0), std::move(meta)};
  for (const auto& p : out.model.params()) {
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (shape != p.value->shape())
      throw NnError(NnErrc::BadCheckpoint, path.string() + ": " + p.name + " has shape " + to_string(shape));
    if (scalar == 4) {
      read_values<float>(r, *p.value);
    } else {
      read_values<double>(r, *p.value);
    }
  }
  if (!r.at_end()) throw NnError(NnErrc::BadCheckpoint, path.string() + ": trailing bytes");
  return out;
}

template void save_checkpoint(const std::filesystem::path&, Model<float>&, const CheckpointMeta&);
template void save_checkpoint(const std::filesystem::path&, Model<double>&, const CheckpointMeta&);
template LoadedCheckpoint<float> load_checkpoint(const std::filesystem::path&);
template LoadedCheckpoint<double> load_checkpoint(const std::filesystem::path&);

}  // namespace wavecomp::nn
