#include "wavecomp/wavelet.hpp"

#include <algorithm>
#include <string>

#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"

namespace wavecomp {

namespace {

constexpr std::size_t kParallelThreshold = 1 << 14;

std::string dims(std::size_t w, std::size_t h) { return std::to_string(w) + "x" + std::to_string(h); }

void expect_dims(const CoeffGrid& g, std::size_t w, std::size_t h, const char* what) {
  if (g.width != w || g.height != h || g.data.size() != w * h)
    throw WaveletError(WaveletErrc::ShapeMismatch,
                       std::string(what) + " is " + dims(g.width, g.height) + ", expected " + dims(w, h));
}

// Vertical lifting over whole rows: each phase is a loop over rows whose inner
// loop runs along x and vectorizes.
void vertical_forward(const CoeffGrid& in, CoeffGrid& low, CoeffGrid& high) {
  const std::size_t w = in.width;
  const std::size_t h = in.height;
  const std::size_t nl = low_extent(h);
  const std::size_t nh = high_extent(h);
  low = CoeffGrid(w, nl);
  high = CoeffGrid(w, nh);
  if (h == 1) {
    low.data = in.data;
    return;
  }
  const bool par = in.size() >= kParallelThreshold;
  const int threads = worker_threads();

#pragma omp parallel num_threads(threads) if (par)
  {
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < nh; ++i) {
      const Coefficient* even = in.row(2 * i).data();
      const Coefficient* odd = in.row(2 * i + 1).data();
      const Coefficient* next = in.row(2 * i + 2 < h ? 2 * i + 2 : 2 * i).data();
      Coefficient* out = high.row(i).data();
      for (std::size_t x = 0; x < w; ++x) out[x] = odd[x] - ((even[x] + next[x]) >> 1);
    }
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < nl; ++i) {
      const Coefficient* even = in.row(2 * i).data();
      const Coefficient* left = high.row(i > 0 ? i - 1 : 0).data();
      const Coefficient* right = high.row(i < nh ? i : nh - 1).data();
      Coefficient* out = low.row(i).data();
      for (std::size_t x = 0; x < w; ++x) out[x] = even[x] + ((left[x] + right[x] + 2) >> 2);
    }
  }
}

void vertical_inverse(const CoeffGrid& low, const CoeffGrid& high, CoeffGrid& out) {
  const std::size_t w = low.width;
  const std::size_t h = low.height + high.height;
  const std::size_t nl = low.height;
  const std::size_t nh = high.height;
  out = CoeffGrid(w, h);
  if (h == 1) {
    out.data = low.data;
    return;
  }
  const bool par = out.size() >= kParallelThreshold;
  const int threads = worker_threads();

#pragma omp parallel num_threads(threads) if (par)
  {
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < nl; ++i) {
      const Coefficient* lo = low.row(i).data();
      const Coefficient* left = high.row(i > 0 ? i - 1 : 0).data();
      const Coefficient* right = high.row(i < nh ? i : nh - 1).data();
      Coefficient* even = out.row(2 * i).data();
      for (std::size_t x = 0; x < w; ++x) even[x] = lo[x] - ((left[x] + right[x] + 2) >> 2);
    }
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < nh; ++i) {
      const Coefficient* hi = high.row(i).data();
      const Coefficient* even = out.row(2 * i).data();
      const Coefficient* next = out.row(2 * i + 2 < h ? 2 * i + 2 : 2 * i).data();
      Coefficient* odd = out.row(2 * i + 1).data();
      for (std::size_t x = 0; x < w; ++x) odd[x] = hi[x] + ((even[x] + next[x]) >> 1);
    }
  }
}

void horizontal_forward(const CoeffGrid& in, CoeffGrid& low, CoeffGrid& high) {
  const std::size_t w = in.width;
  const std::size_t h = in.height;
  low = CoeffGrid(low_extent(w), h);
  high = CoeffGrid(high_extent(w), h);
  const bool par = in.size() >= kParallelThreshold;
#pragma omp parallel for schedule(static) num_threads(worker_threads()) if (par)
  for (std::size_t y = 0; y < h; ++y)
    lifting::forward_1d(in.row(y).data(), 1, w, low.row(y).data(), high.row(y).data());
}

void horizontal_inverse(const CoeffGrid& low, const CoeffGrid& high, CoeffGrid& out) {
  const std::size_t w = low.width + high.width;
  const std::size_t h = low.height;
  out = CoeffGrid(w, h);
  const bool par = out.size() >= kParallelThreshold;
#pragma omp parallel for schedule(static) num_threads(worker_threads()) if (par)
  for (std::size_t y = 0; y < h; ++y)
    lifting::inverse_1d(low.row(y).data(), high.width ? high.row(y).data() : nullptr, w,
                        out.row(y).data(), 1);
}

CoeffGrid to_coefficients(const Image& image) {
  CoeffGrid g(image.width, image.height);
  std::copy(image.data.begin(), image.data.end(), g.data.begin());
  return g;
}

Image to_image(const CoeffGrid& g) {
  Image img(g.width, g.height);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    const Coefficient v = g.data[i];
    if (v < 0 || v > 255)
      throw WaveletError(WaveletErrc::ShapeMismatch,
                         "reconstructed sample " + std::to_string(v) + " outside [0, 255]");
    img.data[i] = static_cast<std::uint8_t>(v);
  }
  return img;
}

}  // namespace

namespace lifting {

void forward_1d(const Coefficient* x, std::size_t stride, std::size_t n, Coefficient* lo,
                Coefficient* hi) {
  if (n == 0) return;
  if (n == 1) {
    lo[0] = x[0];
    return;
  }
  const std::size_t nl = low_extent(n);
  const std::size_t nh = high_extent(n);
  auto at = [&](std::size_t i) { return x[i * stride]; };
  for (std::size_t i = 0; i < nh; ++i) {
    const Coefficient right = 2 * i + 2 < n ? at(2 * i + 2) : at(2 * i);
    hi[i] = at(2 * i + 1) - ((at(2 * i) + right) >> 1);
  }
  for (std::size_t i = 0; i < nl; ++i) {
    const Coefficient left = hi[i > 0 ? i - 1 : 0];
    const Coefficient right = hi[i < nh ? i : nh - 1];
    lo[i] = at(2 * i) + ((left + right + 2) >> 2);
  }
}

void inverse_1d(const Coefficient* lo, const Coefficient* hi, std::size_t n, Coefficient* x,
                std::size_t stride) {
  if (n == 0) return;
  if (n == 1) {
    x[0] = lo[0];
    return;
  }
  const std::size_t nl = low_extent(n);
  const std::size_t nh = high_extent(n);
  for (std::size_t i = 0; i < nl; ++i) {
    const Coefficient left = hi[i > 0 ? i - 1 : 0];
    const Coefficient right = hi[i < nh ? i : nh - 1];
    x[2 * i * stride] = lo[i] - ((left + right + 2) >> 2);
  }
  for (std::size_t i = 0; i < nh; ++i) {
    const Coefficient even = x[2 * i * stride];
    const Coefficient next = 2 * i + 2 < n ? x[(2 * i + 2) * stride] : even;
    x[(2 * i + 1) * stride] = hi[i] + ((even + next) >> 1);
  }
}

}  // namespace lifting

Extent ll_extent(Extent base, int depth) {
  for (int d = 0; d < depth; ++d) base = {low_extent(base.width), low_extent(base.height)};
  return base;
}

Extent resolution_extent(Extent base, int levels, ResolutionLevel r) {
  if (r.value < 1 || r.value > levels)
    throw WaveletError(WaveletErrc::BadResolution,
                       "resolution " + std::to_string(r.value) + " outside [1, " + std::to_string(levels) + "]");
  return ll_extent(base, resolution_depth(levels, r));
}

void validate_levels(Extent base, int levels) {
  if (base.width == 0 || base.height == 0)
    throw WaveletError(WaveletErrc::EmptyImage, "image is " + dims(base.width, base.height));
  if (levels < 0 || levels > kMaxLevels)
    throw WaveletError(WaveletErrc::TooManyLevels,
                       std::to_string(levels) + " levels requested, supported range is [0, 8]");
  const std::size_t smallest = std::min(base.width, base.height);
  if ((std::size_t{1} << levels) > smallest)
    throw WaveletError(WaveletErrc::TooManyLevels,
                       "2^" + std::to_string(levels) + " exceeds min extent of " + dims(base.width, base.height));
}

void analyze_level(const CoeffGrid& input, CoeffGrid& ll, DetailBands& details) {
  CoeffGrid low, high;
  vertical_forward(input, low, high);
  horizontal_forward(low, ll, details.hl);
  horizontal_forward(high, details.lh, details.hh);
}

CoeffGrid synthesize_level(const CoeffGrid& ll, const DetailBands& details, std::size_t width,
                           std::size_t height) {
  const std::size_t lw = low_extent(width), hw = high_extent(width);
  const std::size_t lh = low_extent(height), hh = high_extent(height);
  expect_dims(ll, lw, lh, "LL");
  expect_dims(details.hl, hw, lh, "HL");
  expect_dims(details.lh, lw, hh, "LH");
  expect_dims(details.hh, hw, hh, "HH");
  CoeffGrid low, high, out;
  horizontal_inverse(ll, details.hl, low);
  if (hh > 0) {
    horizontal_inverse(details.lh, details.hh, high);
  } else {
    high = CoeffGrid(width, 0);
  }
  vertical_inverse(low, high, out);
  return out;
}

SubbandPyramid forward_dwt(const CoeffGrid& samples, int levels) {
  validate_levels({samples.width, samples.height}, levels);
  SubbandPyramid p;
  p.levels = levels;
  p.base_width = samples.width;
  p.base_height = samples.height;
  p.details.resize(static_cast<std::size_t>(levels));
  p.ll = samples;
  for (int d = 1; d <= levels; ++d) {
    CoeffGrid next;
    analyze_level(p.ll, next, p.at_depth(d));
    p.ll = std::move(next);
  }
  return p;
}

SubbandPyramid forward_dwt(const Image& image, int levels) {
  return forward_dwt(to_coefficients(image), levels);
}

void validate_pyramid(const SubbandPyramid& p) {
  const Extent base{p.base_width, p.base_height};
  validate_levels(base, p.levels);
  if (p.details.size() != static_cast<std::size_t>(p.levels))
    throw WaveletError(WaveletErrc::ShapeMismatch,
                       std::to_string(p.details.size()) + " detail triplets for " + std::to_string(p.levels) + " levels");
  Extent parent = base;
  for (int d = 1; d <= p.levels; ++d) {
    const auto& b = p.at_depth(d);
    const std::string tag = " at depth " + std::to_string(d);
    expect_dims(b.hl, high_extent(parent.width), low_extent(parent.height), ("HL" + tag).c_str());
    expect_dims(b.lh, low_extent(parent.width), high_extent(parent.height), ("LH" + tag).c_str());
    expect_dims(b.hh, high_extent(parent.width), high_extent(parent.height), ("HH" + tag).c_str());
    parent = {low_extent(parent.width), low_extent(parent.height)};
  }
  expect_dims(p.ll, parent.width, parent.height, "LL");
}

CoeffGrid inverse_dwt_coefficients(const SubbandPyramid& p) {
  validate_pyramid(p);
  CoeffGrid current = p.ll;
  for (int d = p.levels; d >= 1; --d) {
    const Extent parent = ll_extent({p.base_width, p.base_height}, d - 1);
    current = synthesize_level(current, p.at_depth(d), parent.width, parent.height);
  }
  return current;
}

Image inverse_dwt(const SubbandPyramid& pyramid) { return to_image(inverse_dwt_coefficients(pyramid)); }

CoeffGrid reconstruct_ll(const SubbandPyramid& p, ResolutionLevel r) {
  validate_pyramid(p);
  const Extent base{p.base_width, p.base_height};
  resolution_extent(base, p.levels, r);  // range check
  const int target = resolution_depth(p.levels, r);
  CoeffGrid current = p.ll;
  for (int d = p.levels; d > target; --d) {
    const Extent parent = ll_extent(base, d - 1);
    current = synthesize_level(current, p.at_depth(d), parent.width, parent.height);
  }
  return current;
}

}  // namespace wavecomp
