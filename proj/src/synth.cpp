#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wavecomp/bench.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/rng.hpp"

namespace wavecomp {

namespace {

using Canvas = Grid<double>;

void fill_rect(Canvas& c, long x0, long y0, long x1, long y1, double v) {
  x0 = std::max(x0, 0L);
  y0 = std::max(y0, 0L);
  x1 = std::min(x1, static_cast<long>(c.width));
  y1 = std::min(y1, static_cast<long>(c.height));
  for (long y = y0; y < y1; ++y)
    for (long x = x0; x < x1; ++x) c.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = v;
}

long ri(Rng& rng, long lo, long hi) { return lo + static_cast<long>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1))); }

// A run of word-like dark boxes between x0 and x1 on one baseline.
void text_line(Canvas& c, Rng& rng, long x0, long x1, long y, long h, double ink, double s) {
  long x = x0;
  while (x < x1) {
    const long w = std::min(x1, x + ri(rng, static_cast<long>(4 * s), static_cast<long>(28 * s)));
    fill_rect(c, x, y, w, y + h, ink + uniform(rng, -15.0, 15.0));
    x = w + ri(rng, static_cast<long>(3 * s) + 1, static_cast<long>(6 * s) + 1);
  }
}

void draw_advert(Canvas& c, Rng& rng, double s) {
  const long n = static_cast<long>(c.width);
  for (auto& v : c.data) v = 205.0;
  struct Blob { double x, y, r, w; };
  std::vector<Blob> blobs;
  for (int i = 0, k = static_cast<int>(ri(rng, 2, 4)); i < k; ++i)
    blobs.push_back({uniform(rng, 0.15, 0.85) * n, uniform(rng, 0.3, 0.9) * n, uniform(rng, 0.12, 0.3) * n, uniform(rng, 0.6, 1.0)});
  const long period = ri(rng, static_cast<long>(5 * s), static_cast<long>(7 * s)) + 1;
  for (long y = 0; y < n; ++y)
    for (long x = 0; x < n; ++x) {
      double density = 0.25;
      for (const auto& b : blobs) {
        const double d2 = ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (b.r * b.r);
        density += b.w * std::exp(-d2);
      }
      density = std::min(density, 1.0);
      const double cx = static_cast<double>(x % period) - (period - 1) / 2.0;
      const double cy = static_cast<double>(y % period) - (period - 1) / 2.0;
      const double radius = density * period * 0.62;
      if (cx * cx + cy * cy <= radius * radius) c.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = 30.0;
    }
  const long bar = ri(rng, static_cast<long>(14 * s), static_cast<long>(26 * s));
  fill_rect(c, 0, static_cast<long>(8 * s), n, static_cast<long>(8 * s) + bar, 25.0);
}

void draw_form(Canvas& c, Rng& rng, double s) {
  const long n = static_cast<long>(c.width);
  for (auto& v : c.data) v = 246.0;
  const long margin = static_cast<long>(14 * s);
  const long step = ri(rng, static_cast<long>(16 * s), static_cast<long>(22 * s));
  const long top = ri(rng, static_cast<long>(30 * s), static_cast<long>(44 * s));
  text_line(c, rng, margin, n / 2, static_cast<long>(10 * s), static_cast<long>(8 * s), 40.0, s);
  std::vector<long> cols{margin, n - margin};
  for (int i = 0, k = static_cast<int>(ri(rng, 1, 3)); i < k; ++i) cols.push_back(ri(rng, n / 5, 4 * n / 5));
  std::sort(cols.begin(), cols.end());
  const long thick = std::max(1L, static_cast<long>(s + 0.5));
  long y = top;
  for (; y + step < n - margin; y += step) {
    fill_rect(c, margin, y, n - margin, y + thick, 35.0);
    for (std::size_t i = 0; i + 1 < cols.size(); ++i)
      if (uniform01(rng) < 0.5)
        text_line(c, rng, cols[i] + static_cast<long>(3 * s), std::min(cols[i + 1] - static_cast<long>(3 * s), cols[i] + (cols[i + 1] - cols[i]) / 2),
                  y + step / 3, std::max(2L, static_cast<long>(4 * s)), 70.0, s);
  }
  fill_rect(c, margin, y, n - margin, y + thick, 35.0);
  for (long cx : cols) fill_rect(c, cx, top, cx + thick, y + thick, 35.0);
}

void draw_memo(Canvas& c, Rng& rng, double s) {
  const long n = static_cast<long>(c.width);
  for (auto& v : c.data) v = 250.0;
  const long margin = ri(rng, static_cast<long>(20 * s), static_cast<long>(32 * s));
  long y = ri(rng, static_cast<long>(16 * s), static_cast<long>(26 * s));
  const long h = std::max(2L, static_cast<long>(5 * s));
  for (int i = 0; i < 3; ++i, y += static_cast<long>(11 * s))
    text_line(c, rng, margin, margin + ri(rng, n / 5, n / 3), y, h, 45.0, s);
  y += ri(rng, static_cast<long>(10 * s), static_cast<long>(20 * s));
  fill_rect(c, margin, y, n - margin, y + std::max(1L, static_cast<long>(s)), 90.0);
  y += static_cast<long>(14 * s);
  for (int i = 0, k = static_cast<int>(ri(rng, 3, 6)); i < k; ++i, y += static_cast<long>(12 * s))
    text_line(c, rng, margin, n - margin - ri(rng, 0, n / 3), y, h, 50.0, s);
}

void draw_text(Canvas& c, Rng& rng, double s) {
  const long n = static_cast<long>(c.width);
  for (auto& v : c.data) v = 238.0;
  const long margin = ri(rng, static_cast<long>(10 * s), static_cast<long>(18 * s));
  const long pitch = ri(rng, static_cast<long>(8 * s), static_cast<long>(10 * s));
  const long h = std::max(2L, static_cast<long>(pitch * 0.6));
  for (long y = margin; y + h < n - margin; y += pitch) {
    if (uniform01(rng) < 0.06) continue;
    text_line(c, rng, margin, n - margin - ri(rng, 0, static_cast<long>(20 * s)), y, h, 40.0, s);
  }
}

}  // namespace

Image synth_page(int class_index, std::size_t size, std::uint64_t seed) {
  if (size < 16) throw BenchError(BenchErrc::BadArgument, "synthetic page size must be at least 16");
  if (class_index < 0 || class_index >= static_cast<int>(std::size(kSynthClasses)))
    throw BenchError(BenchErrc::BadArgument, "synthetic class " + std::to_string(class_index) + " out of range");
  Rng rng(seed);
  Canvas c(size, size);
  const double s = static_cast<double>(size) / 256.0;
  switch (class_index) {
    case 0: draw_advert(c, rng, s); break;
    case 1: draw_form(c, rng, s); break;
    case 2: draw_memo(c, rng, s); break;
    default: draw_text(c, rng, s); break;
  }
  const double shift = uniform(rng, -5.0, 5.0);
  Image img(size, size);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = c.data[i] + shift + uniform(rng, -4.0, 4.0);
    img.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return img;
}

void make_synthetic_corpus(const std::filesystem::path& out_dir, const SynthConfig& config) {
  if (config.per_class < 10) throw BenchError(BenchErrc::BadArgument, "--per-class must be at least 10");
  for (std::size_t c = 0; c < std::size(kSynthClasses); ++c) {
    const auto dir = out_dir / kSynthClasses[c];
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < config.per_class; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%03zu.pgm", kSynthClasses[c], i);
      const auto seed = mix_seed(mix_seed(config.seed, c), i);
      write_pgm(dir / name, synth_page(static_cast<int>(c), config.size, seed));
    }
  }
}

}  // namespace wavecomp
