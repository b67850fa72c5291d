#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wavecomp/codec.hpp"
#include "wavecomp/tensor.hpp"
#include "wavecomp/wavelet.hpp"

namespace wavecomp {

// LL coefficients are divided by this before entering the network. The
// reversible 5/3 low-pass has unit DC gain, so LL stays within [0, 255] at
// every depth; a power of two keeps de-normalization exact.
inline constexpr double kInputScale = 256.0;

enum class Split : std::uint8_t { Train, Val };

const char* to_string(Split s);

struct CorpusEntry {
  std::filesystem::path path;  // relative to the corpus root
  int class_index = 0;
  Split split = Split::Train;
  friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

struct LabeledCorpus {
  std::filesystem::path root;  // directory holding manifest.tsv
  std::vector<std::string> classes;
  std::vector<CorpusEntry> entries;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  int levels = kDefaultLevels;
  std::size_t width = 256;
  std::size_t height = 256;

  std::size_t class_count() const { return classes.size(); }
  std::vector<std::size_t> indices(Split s) const;
  std::filesystem::path stream_path(std::size_t entry) const { return root / entries.at(entry).path; }
};

struct CorpusConfig {
  int levels = kDefaultLevels;
  std::size_t width = 256;  // canonical geometry; inputs are resized to it
  std::size_t height = 256;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

inline constexpr const char* kManifestName = "manifest.tsv";

// Encodes every PGM/PNG under src_dir/<class>/ into out_dir/<class>/<stem>.wcc
// and writes out_dir/manifest.tsv. Classes are the subdirectories in
// lexicographic order.
LabeledCorpus build_corpus(const std::filesystem::path& src_dir, const std::filesystem::path& out_dir,
                           const CorpusConfig& config = {});

// Stratified, seeded re-split; per class round(fraction * n) entries train
// (kept within [1, n - 1] when n >= 2).
LabeledCorpus split_corpus(LabeledCorpus corpus, double train_fraction, std::uint64_t seed);

std::string format_manifest(const LabeledCorpus& corpus);
void write_manifest(const LabeledCorpus& corpus);
LabeledCorpus read_manifest(const std::filesystem::path& manifest_path);

template <typename T>
struct Batch {
  nn::Tensor<T> inputs;  // (B, H_r, W_r, 1)
  nn::Tensor<T> labels;  // (B, classes), one-hot
  std::vector<int> classes;
};

// Partially decodes each entry at resolution r and normalizes by kInputScale.
template <typename T>
Batch<T> load_batch(const LabeledCorpus& corpus, std::span<const std::size_t> indices, ResolutionLevel r);

// Same, from streams already in memory (one per index).
template <typename T>
Batch<T> make_batch(std::span<const std::vector<std::uint8_t>> streams, std::span<const int> classes,
                    std::size_t class_count, ResolutionLevel r);

}  // namespace wavecomp
