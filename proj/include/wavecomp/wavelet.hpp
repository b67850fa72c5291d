#pragma once

#include <cstddef>
#include <vector>

#include "wavecomp/image.hpp"

namespace wavecomp {

inline constexpr int kMaxLevels = 8;
inline constexpr int kDefaultLevels = 3;

// Detail subbands of one decomposition depth. HL is high-pass horizontally,
// LH high-pass vertically.
struct DetailBands {
  CoeffGrid hl;
  CoeffGrid lh;
  CoeffGrid hh;

  friend bool operator==(const DetailBands&, const DetailBands&) = default;
};

struct SubbandPyramid {
  int levels = 0;
  std::size_t base_width = 0;
  std::size_t base_height = 0;
  CoeffGrid ll;                      // LL at depth `levels`
  std::vector<DetailBands> details;  // details[d - 1] holds depth d; depth 1 is finest

  const DetailBands& at_depth(int depth) const { return details[static_cast<std::size_t>(depth - 1)]; }
  DetailBands& at_depth(int depth) { return details[static_cast<std::size_t>(depth - 1)]; }

  friend bool operator==(const SubbandPyramid&, const SubbandPyramid&) = default;
};

// LL resolution index: 1 is the coarsest (LL at depth D), D the finest partial
// reconstruction (LL at depth 1).
struct ResolutionLevel {
  int value = 1;
  constexpr explicit ResolutionLevel(int v) : value(v) {}
  friend constexpr bool operator==(ResolutionLevel, ResolutionLevel) = default;
};

struct Extent {
  std::size_t width = 0;
  std::size_t height = 0;
  friend constexpr bool operator==(Extent, Extent) = default;
};

constexpr std::size_t low_extent(std::size_t n) { return (n + 1) / 2; }
constexpr std::size_t high_extent(std::size_t n) { return n / 2; }

// LL extent after `depth` ceil-halvings.
Extent ll_extent(Extent base, int depth);
// LL extent at resolution r of a D-level pyramid (depth D - r + 1).
Extent resolution_extent(Extent base, int levels, ResolutionLevel r);
// Depth of the LL band delivered at resolution r.
constexpr int resolution_depth(int levels, ResolutionLevel r) { return levels - r.value + 1; }

// Throws TooManyLevels unless 0 <= levels <= kMaxLevels and 2^levels <= min(w, h).
void validate_levels(Extent base, int levels);

// Reversible integer 5/3 lifting, symmetric extension, vertical pass first.
// levels == 0 yields the identity pyramid (LL = input).
SubbandPyramid forward_dwt(const Image& image, int levels = kDefaultLevels);
SubbandPyramid forward_dwt(const CoeffGrid& samples, int levels = kDefaultLevels);

// Exact inverse. The Image overload throws ShapeMismatch if a sample falls
// outside [0, 255] (the pyramid did not come from an 8-bit image).
Image inverse_dwt(const SubbandPyramid& pyramid);
CoeffGrid inverse_dwt_coefficients(const SubbandPyramid& pyramid);

// LL grid at resolution r, inverse lifting only the detail bands at depths
// D .. D - r + 2; finer details are never touched.
CoeffGrid reconstruct_ll(const SubbandPyramid& pyramid, ResolutionLevel r);

// Single-level analysis/synthesis. `synthesize_level` rebuilds the
// width x height parent LL and throws ShapeMismatch on inconsistent bands.
void analyze_level(const CoeffGrid& input, CoeffGrid& ll, DetailBands& details);
CoeffGrid synthesize_level(const CoeffGrid& ll, const DetailBands& details, std::size_t width,
                           std::size_t height);

// Checks the pyramid's ceil/floor-halving chain; throws ShapeMismatch.
void validate_pyramid(const SubbandPyramid& pyramid);

namespace lifting {

// 1-D forward/inverse 5/3 lifting on strided data. lo gets ceil(n/2)
// samples, hi floor(n/2).
void forward_1d(const Coefficient* x, std::size_t stride, std::size_t n, Coefficient* lo,
                Coefficient* hi);
void inverse_1d(const Coefficient* lo, const Coefficient* hi, std::size_t n, Coefficient* x,
                std::size_t stride);

}  // namespace lifting

namespace reference {

// Serial column-by-column implementation kept as a cross-check and
// benchmark baseline for the row-vectorized parallel kernels.
SubbandPyramid forward_dwt(const CoeffGrid& samples, int levels);
CoeffGrid inverse_dwt_coefficients(const SubbandPyramid& pyramid);

}  // namespace reference

}  // namespace wavecomp
