#include "wavecomp/archive.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"
#include "wavecomp/rng.hpp"

namespace wavecomp {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(const std::string& s, const char* what) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ArchiveError(ArchiveErrc::BadManifest, std::string("bad ") + what + " '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const char* what) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ArchiveError(ArchiveErrc::BadManifest, std::string("bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

const char* to_string(Split s) { return s == Split::Train ? "train" : "val"; }

std::vector<std::size_t> LabeledCorpus::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == s) out.push_back(i);
  return out;
}

LabeledCorpus split_corpus(LabeledCorpus corpus, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArchiveError(ArchiveErrc::FractionOutOfRange, "train fraction " + format_double(train_fraction));
  corpus.train_fraction = train_fraction;
  corpus.seed = seed;
  for (std::size_t c = 0; c < corpus.classes.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i)
      if (corpus.entries[i].class_index == static_cast<int>(c)) members.push_back(i);
    const std::size_t n = members.size();
    if (n == 0) continue;
    Rng rng(mix_seed(seed, c));
    shuffle(members.begin(), members.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    for (std::size_t k = 0; k < n; ++k) corpus.entries[members[k]].split = k < n_train ? Split::Train : Split::Val;
  }
  return corpus;
}

LabeledCorpus build_corpus(const fs::path& src_dir, const fs::path& out_dir, const CorpusConfig& config) {
  if (!fs::is_directory(src_dir))
    throw ArchiveError(ArchiveErrc::EmptyClass, src_dir.string() + " is not a directory");
  validate_levels({config.width, config.height}, config.levels);

  LabeledCorpus corpus;
  corpus.root = out_dir;
  corpus.levels = config.levels;
  corpus.width = config.width;
  corpus.height = config.height;

  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(src_dir))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (class_dirs.size() < 2)
    throw ArchiveError(ArchiveErrc::EmptyClass,
                       src_dir.string() + " has " + std::to_string(class_dirs.size()) + " class directories, need >= 2");

  struct Source {
    fs::path input;
    fs::path relative;
  };
  std::vector<Source> sources;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    const std::string name = class_dirs[c].filename().string();
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(class_dirs[c]))
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    if (files.empty()) throw ArchiveError(ArchiveErrc::EmptyClass, "class '" + name + "' has no PGM/PNG images");
    std::set<std::string> stems;
    for (const auto& f : files) {
      const std::string stem = f.stem().string();
      if (!stems.insert(stem).second)
        throw ArchiveError(ArchiveErrc::DuplicateStem, "class '" + name + "' has two images with stem '" + stem + "'");
      const fs::path rel = fs::path(name) / (stem + ".wcc");
      sources.push_back({f, rel});
      corpus.entries.push_back({rel, static_cast<int>(c), Split::Train});
    }
    corpus.classes.push_back(name);
    fs::create_directories(out_dir / name);
  }

  std::vector<std::exception_ptr> errors(sources.size());
  const int threads = worker_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < sources.size(); ++i) {
    try {
      Image img;
      try {
        img = read_image(sources[i].input);
      } catch (const Error& e) {
        throw ArchiveError(ArchiveErrc::UnreadableImage, sources[i].input.string() + ": " + e.what());
      }
      img = resize_bilinear(img, config.width, config.height);
      write_stream_file(out_dir / sources[i].relative, encode(img, config.levels));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  corpus = split_corpus(std::move(corpus), config.train_fraction, config.seed);
  write_manifest(corpus);
  return corpus;
}

std::string format_manifest(const LabeledCorpus& corpus) {
  std::ostringstream out;
  out << "#wavecomp-manifest\t1\n";
  out << "#classes";
  for (const auto& c : corpus.classes) out << '\t' << c;
  out << '\n';
  out << "#levels\t" << corpus.levels << '\n';
  out << "#size\t" << corpus.width << '\t' << corpus.height << '\n';
  out << "#seed\t" << corpus.seed << '\n';
  out << "#train_fraction\t" << format_double(corpus.train_fraction) << '\n';
  for (const auto& e : corpus.entries)
    out << e.path.generic_string() << '\t' << e.class_index << '\t' << to_string(e.split) << '\n';
  return out.str();
}

void write_manifest(const LabeledCorpus& corpus) {
  fs::create_directories(corpus.root);
  const auto path = corpus.root / kManifestName;
  std::ofstream out(path, std::ios::binary);
  out << format_manifest(corpus);
  if (!out) throw ArchiveError(ArchiveErrc::BadManifest, "cannot write " + path.string());
}

LabeledCorpus read_manifest(const fs::path& manifest_path) {
  fs::path path = manifest_path;
  if (fs::is_directory(path)) path /= kManifestName;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError(ArchiveErrc::BadManifest, "cannot open " + path.string());
  LabeledCorpus corpus;
  corpus.root = path.parent_path();
  std::string line;
  bool saw_magic = false;
  bool saw_classes = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (line[0] == '#') {
      const std::string& key = f[0];
      if (key == "#wavecomp-manifest") {
        saw_magic = f.size() == 2 && f[1] == "1";
      } else if (key == "#classes") {
        corpus.classes.assign(f.begin() + 1, f.end());
        saw_classes = true;
      } else if (key == "#levels" && f.size() == 2) {
        corpus.levels = parse_int<int>(f[1], "levels");
      } else if (key == "#size" && f.size() == 3) {
        corpus.width = parse_int<std::size_t>(f[1], "width");
        corpus.height = parse_int<std::size_t>(f[2], "height");
      } else if (key == "#seed" && f.size() == 2) {
        corpus.seed = parse_int<std::uint64_t>(f[1], "seed");
      } else if (key == "#train_fraction" && f.size() == 2) {
        corpus.train_fraction = parse_double(f[1], "train fraction");
      }
      continue;
    }
    if (f.size() != 3)
      throw ArchiveError(ArchiveErrc::BadManifest, path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    CorpusEntry e;
    e.path = fs::path(f[0]);
    e.class_index = parse_int<int>(f[1], "class index");
    if (f[2] == "train") {
      e.split = Split::Train;
    } else if (f[2] == "val") {
      e.split = Split::Val;
    } else {
      throw ArchiveError(ArchiveErrc::BadManifest, path.string() + ":" + std::to_string(line_no) + ": split '" + f[2] + "'");
    }
    corpus.entries.push_back(std::move(e));
  }
  if (!saw_magic || !saw_classes)
    throw ArchiveError(ArchiveErrc::BadManifest, path.string() + ": missing manifest header");
  for (const auto& e : corpus.entries)
    if (e.class_index < 0 || static_cast<std::size_t>(e.class_index) >= corpus.classes.size())
      throw ArchiveError(ArchiveErrc::BadManifest, path.string() + ": class index out of range for " + e.path.string());
  return corpus;
}

template <typename T>
Batch<T> make_batch(std::span<const std::vector<std::uint8_t>> streams, std::span<const int> classes,
                    std::size_t class_count, ResolutionLevel r) {
  if (streams.size() != classes.size())
    throw ArchiveError(ArchiveErrc::BadIndex, "stream and label counts differ");
  Batch<T> batch;
  const std::size_t n = streams.size();
  batch.labels = nn::Tensor<T>({n, class_count});
  batch.classes.assign(classes.begin(), classes.end());
  std::size_t h = 0, w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const PartialDecode ll = decode_partial(streams[i], r);
    if (i == 0) {
      h = ll.ll.height;
      w = ll.ll.width;
      batch.inputs = nn::Tensor<T>({n, h, w, 1});
    } else if (ll.ll.height != h || ll.ll.width != w) {
      throw ArchiveError(ArchiveErrc::GeometryMismatch,
                         "batch element " + std::to_string(i) + " has a different LL geometry");
    }
    T* dst = batch.inputs.data() + i * h * w;
    for (std::size_t k = 0; k < h * w; ++k) dst[k] = static_cast<T>(ll.ll.data[k] / kInputScale);
    const int c = classes[i];
    if (c < 0 || static_cast<std::size_t>(c) >= class_count)
      throw ArchiveError(ArchiveErrc::BadIndex, "class index " + std::to_string(c) + " out of range");
    batch.labels[i * class_count + static_cast<std::size_t>(c)] = T{1};
  }
  return batch;
}

template <typename T>
Batch<T> load_batch(const LabeledCorpus& corpus, std::span<const std::size_t> indices, ResolutionLevel r) {
  std::vector<std::vector<std::uint8_t>> streams;
  std::vector<int> classes;
  streams.reserve(indices.size());
  for (auto i : indices) {
    if (i >= corpus.entries.size())
      throw ArchiveError(ArchiveErrc::BadIndex, "entry " + std::to_string(i) + " out of range");
    streams.push_back(read_stream_file(corpus.stream_path(i)));
    classes.push_back(corpus.entries[i].class_index);
  }
  return make_batch<T>(streams, classes, corpus.class_count(), r);
}

template Batch<float> load_batch<float>(const LabeledCorpus&, std::span<const std::size_t>, ResolutionLevel);
template Batch<double> load_batch<double>(const LabeledCorpus&, std::span<const std::size_t>, ResolutionLevel);
template Batch<float> make_batch<float>(std::span<const std::vector<std::uint8_t>>, std::span<const int>, std::size_t,
                                        ResolutionLevel);
template Batch<double> make_batch<double>(std::span<const std::vector<std::uint8_t>>, std::span<const int>,
                                          std::size_t, ResolutionLevel);

}  // namespace wavecomp
