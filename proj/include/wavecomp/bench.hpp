#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavecomp/archive.hpp"
#include "wavecomp/image.hpp"

namespace wavecomp {

// ct_full / ct_partial; throws BenchError(NonPositiveTime).
double speedup(double ct_full, double ct_partial);

struct MemoryModel {
  int levels = 0;
  std::vector<double> terms;  // l = 0 .. L-1: 3(2^(L-l) - 1) * S * 2^(-l-1) * Z
  double total = 0.0;         // sum of terms
  double closed_form = 0.0;   // (2 * 2^L + 2^(-L) - 3) * Z * S
};

MemoryModel memory_model(int levels, double width, double unit = 1.0);

struct BenchRow {
  int resolution = 0;  // 0 = full decompression
  std::size_t n_images = 0;
  double dt_seconds = 0.0;
  double clt_seconds = 0.0;
  double ct_seconds = 0.0;
  double speedup = 0.0;
  std::uint64_t bytes_read = 0;
  double accuracy = 0.0;  // plain accuracy of the model used for timing
  bool trained = false;   // false: freshly initialized weights were timed
};

struct BenchReport {
  std::vector<BenchRow> rows;  // r = 1..D, then full
  MemoryModel memory;
  std::string environment;
};

struct BenchConfig {
  std::size_t n_images = 25;
  int repetitions = 5;
  std::filesystem::path checkpoint_dir;  // r<r>.wcnn and full.wcnn; missing ones use fresh weights
  std::uint64_t seed = 42;
  std::size_t batch_size = 32;
};

std::filesystem::path checkpoint_name(const std::filesystem::path& dir, int resolution);

// Times the first n_images entries of the corpus single-threaded; each
// figure is the median over repetitions.
BenchReport run_bench(const LabeledCorpus& corpus, const BenchConfig& config = {});

// resolution,n_images,dt_s,clt_s,ct_s,speedup,bytes_read
std::string bench_csv(const BenchReport& report);
std::vector<BenchRow> parse_bench_csv(const std::string& text);

// Whitespace-separated columns for gnuplot: index, resolution label,
// speedup, accuracy (accuracy "nan" when unknown).
std::string plot_data(const std::vector<BenchRow>& rows);

std::string memory_csv(const MemoryModel& m);

inline constexpr const char* kSynthClasses[] = {"advert", "form", "memo", "text"};

struct SynthConfig {
  std::size_t per_class = 50;
  std::size_t size = 256;
  std::uint64_t seed = 42;
};

// Writes out_dir/<class>/<class>_NNN.pgm for four document-like classes:
// halftone advertisement, ruled form, sparse memo, dense text lines.
void make_synthetic_corpus(const std::filesystem::path& out_dir, const SynthConfig& config = {});

// One synthetic page; class_index follows kSynthClasses.
Image synth_page(int class_index, std::size_t size, std::uint64_t seed);

}  // namespace wavecomp
