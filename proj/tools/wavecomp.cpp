// wavecomp: compress, partially decode, classify and benchmark document images.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "wavecomp/archive.hpp"
#include "wavecomp/bench.hpp"
#include "wavecomp/classifier.hpp"
#include "wavecomp/codec.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/metrics.hpp"

namespace fs = std::filesystem;
using namespace wavecomp;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log(const std::string& msg) { std::cerr << "wavecomp: " << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path with_suffix(fs::path p, const std::string& suffix) {
  p += suffix;
  return p;
}

// ---- compress / decompress / inspect -------------------------------------

struct CodecArgs {
  std::string in, out;
  int levels = kDefaultLevels;
  int resolution = 0;
};

void cmd_compress(const CodecArgs& a) {
  const Image img = read_image(a.in);
  const auto stream = encode(img, a.levels);
  write_stream_file(a.out, stream);
  log("compressed " + std::to_string(img.width) + "x" + std::to_string(img.height) + " to " +
      std::to_string(stream.size()) + " bytes");
}

void write_ll_dump(const fs::path& path, const CoeffGrid& ll) {
  std::ostringstream os;
  os << "# wavecomp LL coefficients\n" << ll.width << ' ' << ll.height << '\n';
  for (std::size_t y = 0; y < ll.height; ++y) {
    for (std::size_t x = 0; x < ll.width; ++x) os << (x ? " " : "") << ll.at(x, y);
    os << '\n';
  }
  write_text(path, os.str());
}

void cmd_decompress(const CodecArgs& a) {
  const auto stream = read_stream_file(a.in);
  if (a.resolution == 0) {
    write_pgm(a.out, decode_full(stream));
    return;
  }
  const auto part = decode_partial(stream, ResolutionLevel(a.resolution));
  const CoeffGrid& ll = part.ll;
  const auto [lo, hi] = std::minmax_element(ll.data.begin(), ll.data.end());
  Image view(ll.width, ll.height);
  const double span = *hi > *lo ? static_cast<double>(*hi - *lo) : 1.0;
  for (std::size_t i = 0; i < ll.data.size(); ++i)
    view.data[i] = static_cast<std::uint8_t>(std::lround(255.0 * (ll.data[i] - *lo) / span));
  write_pgm(a.out, view);
  const fs::path dump = with_suffix(a.out, ".ll.txt");
  write_ll_dump(dump, ll);
  log("resolution " + std::to_string(a.resolution) + ": " + std::to_string(ll.width) + "x" + std::to_string(ll.height) +
      ", read " + std::to_string(part.bytes_read) + " of " + std::to_string(stream.size()) + " bytes; coefficients in " +
      dump.string());
}

void cmd_inspect(const CodecArgs& a) {
  const auto stream = read_stream_file(a.in);
  const auto s = inspect(stream);
  const auto& h = s.header;
  std::cout << "file_bytes " << s.file_bytes << "\nversion " << h.version << "\nwidth " << h.width << "\nheight "
            << h.height << "\nlevels " << h.levels << "\ncodeblock " << h.codeblock_size << "\nheader_bytes "
            << h.header_bytes() << "\npackets " << s.packet_count() << "\n";
  std::cout << "packet,resolution,offset,bytes,content\n";
  std::size_t sum = 0;
  for (std::size_t i = 0; i < s.packet_count(); ++i) {
    const int r = static_cast<int>(i) + 1;
    const std::string content =
        r == 1 ? "LL@" + std::to_string(h.levels) : "HL/LH/HH@" + std::to_string(h.levels - r + 2);
    std::cout << i << ',' << r << ',' << h.packet_offset(r) << ',' << h.packet_lengths[i] << ',' << content << '\n';
    sum += h.packet_lengths[i];
  }
  std::cout << "packet_bytes_total " << sum << '\n';
}

// ---- corpus ----------------------------------------------------------------

struct CorpusArgs {
  std::string src, out;
  int levels = kDefaultLevels;
  std::size_t size = 256;
  double fraction = 0.8;
  std::uint64_t seed = 42;
};

void cmd_build_corpus(const CorpusArgs& a) {
  CorpusConfig c;
  c.levels = a.levels;
  c.width = c.height = a.size;
  c.train_fraction = a.fraction;
  c.seed = a.seed;
  const auto corpus = build_corpus(a.src, a.out, c);
  log("corpus: " + std::to_string(corpus.entries.size()) + " images, " + std::to_string(corpus.class_count()) +
      " classes, manifest " + (fs::path(a.out) / kManifestName).string());
}

void cmd_synth(const std::string& out, const SynthConfig& c) {
  make_synthetic_corpus(out, c);
  log("synthetic corpus: " + std::to_string(std::size(kSynthClasses)) + " classes x " + std::to_string(c.per_class) +
      " pages in " + out);
}

// ---- train / eval ---------------------------------------------------------

struct TrainArgs {
  std::string corpus, out, config, csv;
  TrainConfig cfg;
};

void cmd_train(TrainArgs a, const CLI::App& sub) {
  if (!a.config.empty()) {
    // File values first, explicit flags win.
    TrainConfig file = read_train_config(a.config);
    if (!sub.count("--resolution")) a.cfg.resolution = file.resolution;
    if (!sub.count("--epochs")) a.cfg.epochs = file.epochs;
    if (!sub.count("--batch")) a.cfg.batch_size = file.batch_size;
    if (!sub.count("--lr")) a.cfg.learning_rate = file.learning_rate;
    if (!sub.count("--seed")) a.cfg.seed = file.seed;
    if (!sub.count("--train-fraction")) a.cfg.train_fraction = file.train_fraction;
    if (!sub.count("--fc-units")) a.cfg.fc_units = file.fc_units;
    a.cfg.canonical_size = file.canonical_size;
  }
  const LabeledCorpus corpus = read_manifest(a.corpus);
  if (a.cfg.resolution < 1 || a.cfg.resolution > corpus.levels)
    throw UsageError("--resolution " + std::to_string(a.cfg.resolution) + " outside [1, " +
                     std::to_string(corpus.levels) + "] for this corpus");
  if (!sub.count("--train-fraction") && a.config.empty()) a.cfg.train_fraction = corpus.train_fraction;
  a.cfg.validate(corpus.levels);

  log("training at resolution " + std::to_string(a.cfg.resolution) + " for " + std::to_string(a.cfg.epochs) + " epochs");
  const auto result = train<float>(corpus, a.cfg, [](const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %d  train_acc %.4f  train_loss %.5f  val_acc %.4f  val_loss %.5f", r.epoch,
                  r.train_accuracy, r.train_loss, r.val_accuracy, r.val_loss);
    log(buf);
  });
  nn::CheckpointMeta meta{a.cfg.resolution, corpus.levels, corpus.classes};
  auto model = result.model;
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  nn::save_checkpoint(a.out, model, meta);
  const fs::path csv = a.csv.empty() ? with_suffix(a.out, ".epochs.csv") : fs::path(a.csv);
  write_text(csv, epoch_csv(result.history));
  log("best epoch " + std::to_string(result.best_epoch) + "; checkpoint " + a.out + ", history " + csv.string());
}

struct EvalArgs {
  std::string ckpt, corpus, split = "val", confusion;
};

void cmd_eval(const EvalArgs& a) {
  Split split;
  if (a.split == "val") split = Split::Val;
  else if (a.split == "train") split = Split::Train;
  else throw UsageError("--split must be 'train' or 'val'");
  const LabeledCorpus corpus = read_manifest(a.corpus);
  const Evaluation ev = evaluate_checkpoint(a.ckpt, corpus, split);
  std::cout << metrics_csv(ev.confusion);
  const fs::path cpath = a.confusion.empty() ? with_suffix(a.ckpt, ".confusion.csv") : fs::path(a.confusion);
  write_text(cpath, confusion_csv(ev.confusion));
  char buf[200];
  std::snprintf(buf, sizeof buf, "%llu images  accuracy_mc %.4f  accuracy %.4f  DT %.4fs  CLT %.4fs  CT %.4fs",
                static_cast<unsigned long long>(ev.confusion.total()), accuracy_mc(ev.confusion),
                plain_accuracy(ev.confusion), ev.dt_seconds, ev.clt_seconds, ev.ct_seconds);
  log(buf);
  log("confusion matrix " + cpath.string());
}

// ---- bench / report -------------------------------------------------------

struct BenchArgs {
  std::string corpus, ckpt_dir, out = "bench_report.csv";
  BenchConfig cfg;
};

void cmd_bench(BenchArgs a) {
  const LabeledCorpus corpus = read_manifest(a.corpus);
  a.cfg.checkpoint_dir = a.ckpt_dir;
  const BenchReport rep = run_bench(corpus, a.cfg);
  write_text(a.out, bench_csv(rep));
  const fs::path base = fs::path(a.out).parent_path();
  write_text(base / "bench_plot.dat", plot_data(rep.rows));
  write_text(base / "memory_model.csv", memory_csv(rep.memory));
  for (const auto& r : rep.rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-4s DT %.4fs  CLT %.4fs  CT %.4fs  speedup %.2f  bytes %llu%s",
                  r.resolution ? std::to_string(r.resolution).c_str() : "full", r.dt_seconds, r.clt_seconds,
                  r.ct_seconds, r.speedup, static_cast<unsigned long long>(r.bytes_read),
                  r.trained ? "" : "  (untrained weights)");
    log(buf);
  }
  log(rep.environment);
}

void cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  fs::create_directories(out);
  std::ostringstream acc;
  acc << "# run best_val_acc final_val_acc\n";
  bool any_acc = false;
  for (const auto& in : inputs) {
    const std::string text = read_text(in);
    const std::string stem = fs::path(in).stem().string();
    if (text.rfind("resolution,", 0) == 0) {
      write_text(fs::path(out) / (stem + ".speedup.dat"), plot_data(parse_bench_csv(text)));
    } else if (text.rfind("epoch,", 0) == 0) {
      std::istringstream is(text);
      std::string line;
      std::getline(is, line);
      std::ostringstream series;
      series << "# epoch train_acc train_loss val_acc val_loss\n";
      double best = 0.0, last = 0.0;
      while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        series << line << '\n';
        std::istringstream ls(line);
        double e, ta, tl, va, vl;
        if (ls >> e >> ta >> tl >> va >> vl) {
          best = std::max(best, va);
          last = va;
        }
      }
      write_text(fs::path(out) / (stem + ".curve.dat"), series.str());
      acc << stem << ' ' << best << ' ' << last << '\n';
      any_acc = true;
    } else {
      throw UsageError(in + ": neither a bench report nor an epoch history");
    }
  }
  if (any_acc) write_text(fs::path(out) / "accuracy.dat", acc.str());
  log("plot data written to " + out);
}

bool is_usage_kind(const std::string& kind) {
  static const std::set<std::string> kinds{"BadConfig", "BadResolution", "BadArgument", "TooManyLevels",
                                           "FractionOutOfRange"};
  return kinds.count(kind) > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavecomp: resolution-progressive wavelet codec and compressed-domain document classifier"};
  app.require_subcommand(1);

  CodecArgs codec;
  auto* compress = app.add_subcommand("compress", "Encode a PGM/PNG image into a .wcc codestream");
  compress->add_option("input", codec.in, "Input image")->required()->check(CLI::ExistingFile);
  compress->add_option("output", codec.out, "Output .wcc")->required();
  compress->add_option("--levels", codec.levels, "Decomposition levels")->check(CLI::Range(0, kMaxLevels));

  auto* decompress = app.add_subcommand("decompress", "Decode a codestream, fully or at a resolution");
  decompress->add_option("input", codec.in, "Input .wcc")->required()->check(CLI::ExistingFile);
  decompress->add_option("output", codec.out, "Output PGM")->required();
  decompress->add_option("--resolution", codec.resolution, "LL resolution (1 = coarsest); omit for full")
      ->check(CLI::Range(1, kMaxLevels));

  auto* insp = app.add_subcommand("inspect", "Print header and packet table");
  insp->add_option("input", codec.in, "Input .wcc")->required()->check(CLI::ExistingFile);

  CorpusArgs corpus;
  auto* build = app.add_subcommand("build-corpus", "Encode a class-per-directory image tree and write a manifest");
  build->add_option("src", corpus.src, "Source directory")->required()->check(CLI::ExistingDirectory);
  build->add_option("out", corpus.out, "Output directory")->required();
  build->add_option("--levels", corpus.levels, "Decomposition levels")->check(CLI::Range(1, kMaxLevels));
  build->add_option("--size", corpus.size, "Canonical square size")->check(CLI::PositiveNumber);
  build->add_option("--train-fraction", corpus.fraction, "Training fraction")->check(CLI::Range(0.0, 1.0));
  build->add_option("--seed", corpus.seed, "Split seed");

  std::string synth_out;
  SynthConfig synth;
  auto* syn = app.add_subcommand("synth", "Generate the synthetic 4-class document corpus");
  syn->add_option("--out", synth_out, "Output directory")->required();
  syn->add_option("--per-class", synth.per_class, "Pages per class")->check(CLI::Range(10, 100000));
  syn->add_option("--size", synth.size, "Page size")->check(CLI::Range(16, 8192));
  syn->add_option("--seed", synth.seed, "Generator seed");

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "Train the classifier on LL coefficients at one resolution");
  trn->add_option("--corpus", tr.corpus, "Manifest or corpus directory")->required();
  trn->add_option("--resolution", tr.cfg.resolution, "Resolution r in [1, D]");
  trn->add_option("--epochs", tr.cfg.epochs, "Epochs")->check(CLI::PositiveNumber);
  trn->add_option("--batch", tr.cfg.batch_size, "Batch size")->check(CLI::PositiveNumber);
  trn->add_option("--lr", tr.cfg.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  trn->add_option("--seed", tr.cfg.seed, "Seed");
  trn->add_option("--train-fraction", tr.cfg.train_fraction, "Re-split with this training fraction")
      ->check(CLI::Range(0.0, 1.0));
  trn->add_option("--fc-units", tr.cfg.fc_units, "Hidden dense width")->check(CLI::PositiveNumber);
  trn->add_option("--config", tr.config, "key = value config file")->check(CLI::ExistingFile);
  trn->add_option("--csv", tr.csv, "Epoch history CSV (default <out>.epochs.csv)");
  trn->add_option("--out", tr.out, "Checkpoint path")->required();

  EvalArgs ev;
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint; per-class metrics to stdout");
  evl->add_option("--ckpt", ev.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  evl->add_option("--corpus", ev.corpus, "Manifest or corpus directory")->required();
  evl->add_option("--split", ev.split, "train or val");
  evl->add_option("--confusion", ev.confusion, "Confusion CSV (default <ckpt>.confusion.csv)");

  BenchArgs bn;
  auto* bch = app.add_subcommand("bench", "Time DT/CLT/CT per resolution and write bench_report.csv");
  bch->add_option("--corpus", bn.corpus, "Manifest or corpus directory")->required();
  bch->add_option("--ckpt-dir", bn.ckpt_dir, "Directory with r<r>.wcnn / full.wcnn");
  bch->add_option("--n", bn.cfg.n_images, "Images")->check(CLI::PositiveNumber);
  bch->add_option("--reps", bn.cfg.repetitions, "Repetitions (median reported)")->check(CLI::Range(1, 1000));
  bch->add_option("--seed", bn.cfg.seed, "Seed for untrained stand-in weights");
  bch->add_option("--out", bn.out, "Report CSV");

  std::vector<std::string> report_in;
  std::string report_out;
  auto* rpt = app.add_subcommand("report", "Turn bench reports and epoch histories into gnuplot data");
  rpt->add_option("--in", report_in, "Input CSV files")->required()->check(CLI::ExistingFile);
  rpt->add_option("--out", report_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*compress) cmd_compress(codec);
    else if (*decompress) cmd_decompress(codec);
    else if (*insp) cmd_inspect(codec);
    else if (*build) cmd_build_corpus(corpus);
    else if (*syn) cmd_synth(synth_out, synth);
    else if (*trn) cmd_train(tr, *trn);
    else if (*evl) cmd_eval(ev);
    else if (*bch) cmd_bench(bn);
    else if (*rpt) cmd_report(report_in, report_out);
  } catch (const UsageError& e) {
    log(std::string("usage error: ") + e.what());
    return kExitUsage;
  } catch (const Error& e) {
    log(e.what());
    return is_usage_kind(e.kind_name()) ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    log(e.what());
    return kExitData;
  }
  return 0;
}
