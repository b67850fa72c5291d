#include "wavecomp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "wavecomp/classifier.hpp"
#include "wavecomp/codec.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"

namespace wavecomp {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string resolution_label(int r) { return r == 0 ? "full" : std::to_string(r); }

// Back to the environment default on scope exit.
class SingleThreaded {
 public:
  SingleThreaded() { set_worker_threads(1); }
  ~SingleThreaded() { set_worker_threads(0); }
  SingleThreaded(const SingleThreaded&) = delete;
  SingleThreaded& operator=(const SingleThreaded&) = delete;
};

}  // namespace

double speedup(double ct_full, double ct_partial) {
  if (!(ct_full > 0.0) || !(ct_partial > 0.0))
    throw BenchError(BenchErrc::NonPositiveTime, "times must be positive (full " + std::to_string(ct_full) +
                                                     ", partial " + std::to_string(ct_partial) + ")");
  return ct_full / ct_partial;
}

MemoryModel memory_model(int levels, double width, double unit) {
  if (levels < 1) throw BenchError(BenchErrc::BadLevel, "levels must be at least 1, got " + std::to_string(levels));
  if (!(width > 0.0) || !(unit > 0.0)) throw BenchError(BenchErrc::BadArgument, "width and unit must be positive");
  MemoryModel m;
  m.levels = levels;
  for (int l = 0; l < levels; ++l) {
    const double t = 3.0 * (std::ldexp(1.0, levels - l) - 1.0) * unit * std::ldexp(1.0, -l - 1) * width;
    m.terms.push_back(t);
    m.total += t;
  }
  m.closed_form = (2.0 * std::ldexp(1.0, levels) + std::ldexp(1.0, -levels) - 3.0) * width * unit;
  return m;
}

std::filesystem::path checkpoint_name(const std::filesystem::path& dir, int resolution) {
  return dir / (resolution == 0 ? std::string("full.wcnn") : "r" + std::to_string(resolution) + ".wcnn");
}

BenchReport run_bench(const LabeledCorpus& corpus, const BenchConfig& config) {
  if (corpus.entries.empty()) throw BenchError(BenchErrc::BadArgument, "corpus is empty");
  if (config.n_images < 1) throw BenchError(BenchErrc::BadArgument, "--n must be positive");
  if (config.repetitions < 1) throw BenchError(BenchErrc::BadArgument, "repetitions must be positive");
  SingleThreaded pin;

  const std::size_t n = std::min(config.n_images, corpus.entries.size());
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;

  std::vector<std::uint64_t> file_bytes(n);
  for (std::size_t i = 0; i < n; ++i) file_bytes[i] = std::filesystem::file_size(corpus.stream_path(i));

  std::vector<int> resolutions;
  for (int r = 1; r <= corpus.levels; ++r) resolutions.push_back(r);
  resolutions.push_back(0);

  BenchReport report;
  for (int r : resolutions) {
    const Extent in = r == 0 ? Extent{corpus.width, corpus.height}
                             : resolution_extent({corpus.width, corpus.height}, corpus.levels, ResolutionLevel(r));
    BenchRow row;
    row.resolution = r;
    row.n_images = n;

    std::optional<nn::Model<float>> model;
    const auto ck = config.checkpoint_dir.empty() ? std::filesystem::path{} : checkpoint_name(config.checkpoint_dir, r);
    if (!ck.empty() && std::filesystem::exists(ck)) {
      auto loaded = nn::load_checkpoint<float>(ck);
      if (loaded.meta.resolution != r || loaded.meta.levels != corpus.levels)
        throw ClassifierError(ClassifierErrc::GeometryMismatch, ck.string() + " was trained for another resolution");
      model.emplace(std::move(loaded.model));
      row.trained = true;
    } else {
      model.emplace(build_model(corpus.class_count(), in), mix_seed(config.seed, static_cast<std::uint64_t>(r)));
    }

    const std::optional<ResolutionLevel> level = r == 0 ? std::nullopt : std::optional(ResolutionLevel(r));
    std::vector<double> dts, clts;
    Evaluation last;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      last = evaluate(*model, corpus, indices, level, config.batch_size);
      dts.push_back(last.dt_seconds);
      clts.push_back(last.clt_seconds);
    }
    row.dt_seconds = median(dts);
    row.clt_seconds = median(clts);
    row.ct_seconds = row.dt_seconds + row.clt_seconds;
    row.accuracy = plain_accuracy(last.confusion);

    for (std::size_t i = 0; i < n; ++i) {
      if (r == 0) {
        row.bytes_read += file_bytes[i];
      } else {
        const auto stream = read_stream_file(corpus.stream_path(i));
        row.bytes_read += read_header(stream).packet_offset(r + 1);
      }
    }
    report.rows.push_back(row);
  }
  const double ct_full = report.rows.back().ct_seconds;
  for (auto& row : report.rows) row.speedup = speedup(ct_full, row.ct_seconds);

  report.memory = memory_model(std::max(corpus.levels, 1), static_cast<double>(corpus.width));
  std::ostringstream env;
  env << "threads=1 hardware_threads=" << std::thread::hardware_concurrency() << " repetitions=" << config.repetitions
      << " images=" << n << " size=" << corpus.width << "x" << corpus.height << " levels=" << corpus.levels;
  report.environment = env.str();
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::ostringstream os;
  os.precision(9);
  os << "resolution,n_images,dt_s,clt_s,ct_s,speedup,bytes_read\n";
  for (const auto& r : report.rows)
    os << resolution_label(r.resolution) << ',' << r.n_images << ',' << r.dt_seconds << ',' << r.clt_seconds << ','
       << r.ct_seconds << ',' << r.speedup << ',' << r.bytes_read << '\n';
  return os.str();
}

std::vector<BenchRow> parse_bench_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<BenchRow> rows;
  if (!std::getline(in, line) || line.rfind("resolution,n_images,dt_s,clt_s,ct_s,speedup,bytes_read", 0) != 0)
    throw BenchError(BenchErrc::BadArgument, "not a bench report: missing header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() < 7) throw BenchError(BenchErrc::BadArgument, "bench report line " + std::to_string(lineno) + ": expected 7 fields");
    BenchRow r;
    try {
      r.resolution = f[0] == "full" ? 0 : std::stoi(f[0]);
      r.n_images = std::stoull(f[1]);
      r.dt_seconds = std::stod(f[2]);
      r.clt_seconds = std::stod(f[3]);
      r.ct_seconds = std::stod(f[4]);
      r.speedup = std::stod(f[5]);
      r.bytes_read = std::stoull(f[6]);
    } catch (const std::logic_error&) {
      throw BenchError(BenchErrc::BadArgument, "bench report line " + std::to_string(lineno) + ": bad number");
    }
    r.accuracy = std::nan("");
    rows.push_back(r);
  }
  return rows;
}

std::string plot_data(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(9);
  os << "# index resolution speedup accuracy\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << i << ' ' << resolution_label(rows[i].resolution) << ' ' << rows[i].speedup << ' ';
    if (std::isnan(rows[i].accuracy)) os << "nan";
    else os << rows[i].accuracy;
    os << '\n';
  }
  return os.str();
}

std::string memory_csv(const MemoryModel& m) {
  std::ostringstream os;
  os.precision(17);
  os << "level,buffer\n";
  for (std::size_t l = 0; l < m.terms.size(); ++l) os << l << ',' << m.terms[l] << '\n';
  os << "total," << m.total << '\n';
  return os.str();
}

}  // namespace wavecomp
