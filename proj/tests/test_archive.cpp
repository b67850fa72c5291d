#include <doctest.h>

#include <fstream>
#include <functional>
#include <map>
#include <algorithm>

#include "support.hpp"
#include "wavecomp/archive.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"

using namespace wavecomp;
namespace fs = std::filesystem;

namespace {

void make_tree(const fs::path& root, const std::map<std::string, int>& classes, std::size_t size = 32) {
  std::uint64_t seed = 0;
  for (const auto& [name, n] : classes) {
    fs::create_directories(root / name);
    for (int i = 0; i < n; ++i) write_pgm(root / name / (name + std::to_string(i) + ".pgm"), testing::noise_image(size, size, ++seed));
  }
}

ArchiveErrc archive_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const ArchiveError& e) {
    return e.code();
  }
  FAIL("expected an ArchiveError");
  return ArchiveErrc::BadIndex;
}

std::map<int, std::pair<int, int>> per_class_counts(const LabeledCorpus& c) {
  std::map<int, std::pair<int, int>> m;
  for (const auto& e : c.entries) (e.split == Split::Train ? m[e.class_index].first : m[e.class_index].second)++;
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("build_corpus: two classes of five") {
  testing::TempDir dir("archive");
  make_tree(dir / "src", {{"beta", 5}, {"alpha", 5}});
  CorpusConfig cfg;
  cfg.width = cfg.height = 32;
  const auto c = build_corpus(dir / "src", dir / "out", cfg);
  CHECK(c.entries.size() == 10);
  CHECK(c.classes == std::vector<std::string>{"alpha", "beta"});
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    CHECK(fs::exists(c.stream_path(i)));
    CHECK(c.stream_path(i).extension() == ".wcc");
  }
  // Streams decode back to the resized originals (here the identity).
  const auto img = read_pgm(dir / "src" / "alpha" / "alpha0.pgm");
  bool found = false;
  for (std::size_t i = 0; i < c.entries.size(); ++i)
    if (c.entries[i].path.stem() == "alpha0") {
      CHECK(decode_full(read_stream_file(c.stream_path(i))) == img);
      found = true;
    }
  CHECK(found);
  CHECK(fs::exists(dir / "out" / kManifestName));
  const auto again = read_manifest(dir / "out");
  CHECK(again.entries == c.entries);
  CHECK(again.classes == c.classes);
  CHECK(again.levels == c.levels);
  CHECK(again.width == 32);
}

TEST_CASE("build_corpus is deterministic and thread-count independent") {
  testing::TempDir dir("archive_det");
  make_tree(dir / "src", {{"a", 6}, {"b", 7}, {"c", 4}});
  CorpusConfig cfg;
  cfg.width = cfg.height = 32;
  set_worker_threads(1);
  build_corpus(dir / "src", dir / "one", cfg);
  set_worker_threads(3);
  build_corpus(dir / "src", dir / "three", cfg);
  set_worker_threads(0);
  CHECK(slurp(dir / "one" / kManifestName) == slurp(dir / "three" / kManifestName));
  CHECK(slurp(dir / "one" / "b" / "b3.wcc") == slurp(dir / "three" / "b" / "b3.wcc"));
}

TEST_CASE("inputs are resized to the canonical geometry") {
  testing::TempDir dir("archive_resize");
  fs::create_directories(dir / "src" / "x");
  fs::create_directories(dir / "src" / "y");
  write_pgm(dir / "src" / "x" / "a.pgm", testing::noise_image(50, 70, 1));
  write_pgm(dir / "src" / "y" / "b.pgm", testing::noise_image(16, 16, 2));
  CorpusConfig cfg;
  cfg.width = cfg.height = 64;
  const auto c = build_corpus(dir / "src", dir / "out", cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto h = read_header(read_stream_file(c.stream_path(i)));
    CHECK(h.width == 64);
    CHECK(h.height == 64);
  }
}

TEST_CASE("stratified split: 80/20 on ten per class, 50/50 on four") {
  testing::TempDir dir("archive_split");
  make_tree(dir / "src", {{"a", 10}, {"b", 10}, {"c", 10}, {"d", 4}});
  CorpusConfig cfg;
  cfg.width = cfg.height = 32;
  const auto c = build_corpus(dir / "src", dir / "out", cfg);
  auto counts = per_class_counts(c);
  for (int k = 0; k < 3; ++k) CHECK(counts[k] == std::pair{8, 2});
  CHECK(counts[3].first + counts[3].second == 4);
  const auto half = split_corpus(c, 0.5, 7);
  counts = per_class_counts(half);
  CHECK(counts[3] == std::pair{2, 2});
  CHECK(counts[0] == std::pair{5, 5});

  // Different seeds permute differently but keep the counts.
  const auto s1 = split_corpus(c, 0.8, 1), s2 = split_corpus(c, 0.8, 2);
  CHECK(per_class_counts(s1) == per_class_counts(s2));
  bool differs = false;
  for (std::size_t i = 0; i < c.entries.size(); ++i) differs |= s1.entries[i].split != s2.entries[i].split;
  CHECK(differs);
  CHECK(split_corpus(c, 0.8, 1).entries == s1.entries);
  CHECK(s1.indices(Split::Train).size() + s1.indices(Split::Val).size() == c.entries.size());

  // Extreme fractions still leave one sample on each side.
  counts = per_class_counts(split_corpus(c, 0.01, 3));
  for (auto& [k, v] : counts) CHECK(v.first >= 1);
  CHECK(archive_code([&] { split_corpus(c, 0.0, 1); }) == ArchiveErrc::FractionOutOfRange);
  CHECK(archive_code([&] { split_corpus(c, 1.0, 1); }) == ArchiveErrc::FractionOutOfRange);
}

TEST_CASE("build_corpus errors") {
  testing::TempDir dir("archive_err");
  make_tree(dir / "one", {{"only", 3}});
  CHECK(archive_code([&] { build_corpus(dir / "one", dir / "o1"); }) == ArchiveErrc::EmptyClass);

  make_tree(dir / "empty", {{"a", 2}});
  fs::create_directories(dir / "empty" / "b");
  CHECK(archive_code([&] { build_corpus(dir / "empty", dir / "o2"); }) == ArchiveErrc::EmptyClass);

  make_tree(dir / "dup", {{"a", 2}, {"b", 2}});
  fs::copy_file(dir / "dup" / "a" / "a0.pgm", dir / "dup" / "a" / "a0.png");
  CHECK(archive_code([&] { build_corpus(dir / "dup", dir / "o3"); }) == ArchiveErrc::DuplicateStem);

  make_tree(dir / "bad", {{"a", 2}, {"b", 2}});
  std::ofstream(dir / "bad" / "b" / "broken.pgm") << "P5\n4 4\n255\n";
  try {
    build_corpus(dir / "bad", dir / "o4");
    FAIL("expected UnreadableImage");
  } catch (const ArchiveError& e) {
    CHECK(e.code() == ArchiveErrc::UnreadableImage);
    CHECK(std::string(e.what()).find("broken.pgm") != std::string::npos);
  }
}

TEST_CASE("manifest parsing errors") {
  testing::TempDir dir("archive_manifest");
  std::ofstream(dir / "m.tsv") << "hello\n";
  CHECK(archive_code([&] { read_manifest(dir / "m.tsv"); }) == ArchiveErrc::BadManifest);
  CHECK(archive_code([&] { read_manifest(dir / "missing.tsv"); }) == ArchiveErrc::BadManifest);
}

TEST_CASE("load_batch normalizes LL coefficients and one-hot labels") {
  testing::TempDir dir("archive_batch");
  make_tree(dir / "src", {{"a", 3}, {"b", 3}}, 64);
  CorpusConfig cfg;
  cfg.width = cfg.height = 64;
  const auto c = build_corpus(dir / "src", dir / "out", cfg);
  const std::vector<std::size_t> idx = {0, 4};
  for (int r = 1; r <= 3; ++r) {
    const auto b = load_batch<double>(c, idx, ResolutionLevel(r));
    const std::size_t side = 64u >> (3 - r + 1);
    CHECK(b.inputs.shape() == nn::Shape{2, side, side, 1});
    CHECK(b.labels.shape() == nn::Shape{2, 2});
    CHECK(b.labels[0 * 2 + static_cast<std::size_t>(c.entries[0].class_index)] == 1.0);
    CHECK(b.labels[1 * 2 + static_cast<std::size_t>(c.entries[4].class_index)] == 1.0);
    const auto ll = decode_partial(read_stream_file(c.stream_path(4)), ResolutionLevel(r)).ll;
    for (std::size_t k = 0; k < ll.size(); ++k) REQUIRE(b.inputs[side * side + k] == ll.data[k] / 256.0);
  }
  const std::vector<std::size_t> bad = {99};
  CHECK(archive_code([&] { load_batch<float>(c, bad, ResolutionLevel(1)); }) == ArchiveErrc::BadIndex);

  // Streams of different geometry cannot share a batch.
  std::vector<std::vector<std::uint8_t>> streams = {encode(testing::noise_image(32, 32, 1), 2),
                                                    encode(testing::noise_image(40, 32, 1), 2)};
  const std::vector<int> labels = {0, 1};
  CHECK(archive_code([&] { make_batch<float>(streams, labels, 2, ResolutionLevel(1)); }) == ArchiveErrc::GeometryMismatch);
}
