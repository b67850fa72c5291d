#include <doctest.h>

#include "dwt_oracle.hpp"
#include "support.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"
#include "wavecomp/wavelet.hpp"

using namespace wavecomp;

namespace {

CoeffGrid to_coeffs(const Image& img) {
  CoeffGrid g(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) g.data[i] = img.data[i];
  return g;
}

CoeffGrid signed_noise(std::size_t w, std::size_t h, std::uint64_t seed, int span) {
  Rng rng(seed);
  CoeffGrid g(w, h);
  for (auto& v : g.data) v = static_cast<Coefficient>(uniform_index(rng, 2 * static_cast<std::uint64_t>(span) + 1)) - span;
  return g;
}

}  // namespace

TEST_CASE("1-D lifting matches the extension oracle for every length up to 40") {
  Rng rng(11);
  for (std::size_t n = 1; n <= 40; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::int64_t> x(n);
      std::vector<Coefficient> xc(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = xc[i] = static_cast<Coefficient>(uniform_index(rng, 2001)) - 1000;
      std::vector<std::int64_t> lo, hi;
      oracle::analyze_1d(x, lo, hi);
      std::vector<Coefficient> l((n + 1) / 2), h(n / 2);
      lifting::forward_1d(xc.data(), 1, n, l.data(), h.data());
      for (std::size_t k = 0; k < l.size(); ++k) REQUIRE(l[k] == lo[k]);
      for (std::size_t k = 0; k < h.size(); ++k) REQUIRE(h[k] == hi[k]);
      std::vector<Coefficient> back(n);
      lifting::inverse_1d(l.data(), h.data(), n, back.data(), 1);
      REQUIRE(back == xc);
    }
  }
}

TEST_CASE("1-D lifting on a strided column") {
  std::vector<Coefficient> buf = {5, -1, 9, -1, 2, -1, 7, -1, 3, -1};
  std::vector<Coefficient> lo(3), hi(2);
  lifting::forward_1d(buf.data(), 2, 5, lo.data(), hi.data());
  std::vector<std::int64_t> lo_ref, hi_ref;
  oracle::analyze_1d({5, 9, 2, 7, 3}, lo_ref, hi_ref);
  CHECK(std::vector<std::int64_t>(lo.begin(), lo.end()) == lo_ref);
  CHECK(std::vector<std::int64_t>(hi.begin(), hi.end()) == hi_ref);
}

TEST_CASE("hand-computed 1-D example") {
  // x = 10 20 30 40: d0 = 20 - floor(40 / 2) = 0, d1 = 40 - floor((30 + 30) / 2) = 10
  // (x[4] reflects to x[2]); s0 = 10 + floor((0 + 0 + 2) / 4) = 10,
  // s1 = 30 + floor((0 + 10 + 2) / 4) = 33
  std::vector<Coefficient> x = {10, 20, 30, 40}, lo(2), hi(2);
  lifting::forward_1d(x.data(), 1, 4, lo.data(), hi.data());
  CHECK(lo == std::vector<Coefficient>{10, 33});
  CHECK(hi == std::vector<Coefficient>{0, 10});
}

TEST_CASE("2-D forward transform equals the oracle on many shapes") {
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {2, 2}, {3, 5}, {8, 8}, {31, 17}, {17, 31}, {64, 48}, {33, 65}, {256, 4}};
  std::uint64_t seed = 100;
  for (auto [w, h] : shapes) {
    const Extent e{w, h};
    for (int levels = 0; levels <= 4; ++levels) {
      if ((std::size_t{1} << levels) > std::min(w, h)) break;
      const auto img = testing::noise_image(w, h, ++seed);
      const auto got = forward_dwt(img, levels);
      const auto want = oracle::forward(to_coeffs(img), levels);
      INFO(w << "x" << h << " levels " << levels);
      REQUIRE(got == want);
      CHECK(ll_extent(e, levels) == Extent{got.ll.width, got.ll.height});
    }
  }
}

TEST_CASE("signed coefficient input also matches the oracle") {
  const auto g = signed_noise(45, 38, 5, 5000);
  CHECK(forward_dwt(g, 3) == oracle::forward(g, 3));
}

TEST_CASE("inverse transform is exact") {
  std::uint64_t seed = 1;
  for (std::size_t w : {1u, 2u, 7u, 16u, 31u, 100u})
    for (std::size_t h : {1u, 3u, 16u, 17u, 64u}) {
      for (int levels = 0; levels <= kMaxLevels; ++levels) {
        if ((std::size_t{1} << levels) > std::min(w, h)) break;
        const auto img = testing::noise_image(w, h, ++seed);
        REQUIRE(inverse_dwt(forward_dwt(img, levels)) == img);
      }
    }
  const auto g = signed_noise(50, 41, 9, 1 << 20);
  CHECK(inverse_dwt_coefficients(forward_dwt(g, 4)) == g);
}

TEST_CASE("levels == 0 is the identity pyramid") {
  const auto img = testing::noise_image(1, 1, 3);
  const auto p = forward_dwt(img, 0);
  CHECK(p.levels == 0);
  CHECK(p.details.empty());
  CHECK(p.ll == to_coeffs(img));
  CHECK(inverse_dwt(p) == img);
}

TEST_CASE("subband extents use ceil for low-pass and floor for high-pass") {
  const auto p = forward_dwt(testing::noise_image(31, 17, 4), 2);
  CHECK(p.at_depth(1).hl.width == 15);
  CHECK(p.at_depth(1).hl.height == 9);
  CHECK(p.at_depth(1).lh.width == 16);
  CHECK(p.at_depth(1).lh.height == 8);
  CHECK(p.at_depth(1).hh.width == 15);
  CHECK(p.at_depth(2).hh.height == 4);
  CHECK(p.ll.width == 8);
  CHECK(p.ll.height == 5);
  CHECK(resolution_extent({256, 256}, 3, ResolutionLevel(1)) == Extent{32, 32});
  CHECK(resolution_extent({256, 256}, 3, ResolutionLevel(3)) == Extent{128, 128});
  CHECK(resolution_depth(3, ResolutionLevel(2)) == 2);
}

TEST_CASE("constant image has zero details and an unchanged LL") {
  const auto p = forward_dwt(testing::constant_image(40, 24, 77), 3);
  for (const auto& d : p.details) {
    for (auto v : d.hl.data) CHECK(v == 0);
    for (auto v : d.lh.data) CHECK(v == 0);
    for (auto v : d.hh.data) CHECK(v == 0);
  }
  for (auto v : p.ll.data) CHECK(v == 77);
}

TEST_CASE("reconstruct_ll at every resolution equals the oracle LL at that depth") {
  const auto img = testing::noise_image(70, 53, 8);
  const int D = 4;
  const auto p = forward_dwt(img, D);
  for (int r = 1; r <= D; ++r) {
    const int depth = D - r + 1;
    const auto want = oracle::forward(to_coeffs(img), depth).ll;
    CHECK(reconstruct_ll(p, ResolutionLevel(r)) == want);
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(forward_dwt(Image{}, 1), WaveletError);
  try {
    forward_dwt(testing::noise_image(8, 8, 1), 4);
    FAIL("expected TooManyLevels");
  } catch (const WaveletError& e) {
    CHECK(e.code() == WaveletErrc::TooManyLevels);
  }
  try {
    forward_dwt(testing::noise_image(1024, 1024, 1), 9);
    FAIL("expected TooManyLevels");
  } catch (const WaveletError& e) {
    CHECK(e.code() == WaveletErrc::TooManyLevels);
  }
  auto p = forward_dwt(testing::noise_image(16, 16, 2), 2);
  try {
    reconstruct_ll(p, ResolutionLevel(3));
    FAIL("expected BadResolution");
  } catch (const WaveletError& e) {
    CHECK(e.code() == WaveletErrc::BadResolution);
  }
  p.at_depth(1).hh = CoeffGrid(3, 3);
  CHECK_THROWS_AS(inverse_dwt(p), WaveletError);

  // Out-of-range samples cannot form an 8-bit image.
  auto q = forward_dwt(testing::constant_image(8, 8, 255), 1);
  for (auto& v : q.ll.data) v += 10;
  try {
    inverse_dwt(q);
    FAIL("expected ShapeMismatch");
  } catch (const WaveletError& e) {
    CHECK(e.code() == WaveletErrc::ShapeMismatch);
  }
}

TEST_CASE("parallel kernels equal the serial reference for any thread count") {
  const auto g = signed_noise(300, 257, 21, 255);
  const auto ref = reference::forward_dwt(g, 5);
  CHECK(ref == oracle::forward(g, 5));
  for (int threads : {1, 2, 3, 4}) {
    set_worker_threads(threads);
    const auto p = forward_dwt(g, 5);
    CHECK(p == ref);
    CHECK(inverse_dwt_coefficients(p) == g);
    CHECK(reference::inverse_dwt_coefficients(p) == g);
  }
  set_worker_threads(0);
}
