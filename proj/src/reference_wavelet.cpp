#include <vector>

#include "wavecomp/wavelet.hpp"

namespace wavecomp::reference {

namespace {

void analyze(const CoeffGrid& in, CoeffGrid& ll, DetailBands& bands) {
  const std::size_t w = in.width, h = in.height;
  const std::size_t lw = low_extent(w), lh = low_extent(h);
  CoeffGrid vert(w, h);  // rows [0, lh) low, [lh, h) high
  std::vector<Coefficient> lo(lh), hi(h / 2);
  for (std::size_t x = 0; x < w; ++x) {
    lifting::forward_1d(in.data.data() + x, w, h, lo.data(), hi.data());
    for (std::size_t y = 0; y < lh; ++y) vert.at(x, y) = lo[y];
    for (std::size_t y = 0; y < h / 2; ++y) vert.at(x, lh + y) = hi[y];
  }
  ll = CoeffGrid(lw, lh);
  bands.hl = CoeffGrid(w / 2, lh);
  bands.lh = CoeffGrid(lw, h / 2);
  bands.hh = CoeffGrid(w / 2, h / 2);
  std::vector<Coefficient> rlo(lw), rhi(w / 2);
  for (std::size_t y = 0; y < h; ++y) {
    lifting::forward_1d(vert.row(y).data(), 1, w, rlo.data(), rhi.data());
    CoeffGrid& low_band = y < lh ? ll : bands.lh;
    CoeffGrid& high_band = y < lh ? bands.hl : bands.hh;
    const std::size_t row = y < lh ? y : y - lh;
    for (std::size_t x = 0; x < lw; ++x) low_band.at(x, row) = rlo[x];
    for (std::size_t x = 0; x < w / 2; ++x) high_band.at(x, row) = rhi[x];
  }
}

CoeffGrid synthesize(const CoeffGrid& ll, const DetailBands& bands, std::size_t w, std::size_t h) {
  const std::size_t lh = low_extent(h);
  CoeffGrid vert(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    const CoeffGrid& low_band = y < lh ? ll : bands.lh;
    const CoeffGrid& high_band = y < lh ? bands.hl : bands.hh;
    const std::size_t row = y < lh ? y : y - lh;
    lifting::inverse_1d(low_band.row(row).data(), w / 2 ? high_band.row(row).data() : nullptr, w,
                        vert.row(y).data(), 1);
  }
  CoeffGrid out(w, h);
  std::vector<Coefficient> lo(lh), hi(h / 2);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < lh; ++y) lo[y] = vert.at(x, y);
    for (std::size_t y = 0; y < h / 2; ++y) hi[y] = vert.at(x, lh + y);
    lifting::inverse_1d(lo.data(), hi.data(), h, out.data.data() + x, w);
  }
  return out;
}

}  // namespace

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
    analyze(p.ll, next, p.at_depth(d));
    p.ll = std::move(next);
  }
  return p;
}

CoeffGrid inverse_dwt_coefficients(const SubbandPyramid& p) {
  validate_pyramid(p);
  CoeffGrid current = p.ll;
  for (int d = p.levels; d >= 1; --d) {
    const Extent parent = ll_extent({p.base_width, p.base_height}, d - 1);
    current = synthesize(current, p.at_depth(d), parent.width, parent.height);
  }
  return current;
}

}  // namespace wavecomp::reference
