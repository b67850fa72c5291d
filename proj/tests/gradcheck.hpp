#pragma once

// Central-difference gradient checks in double precision. Each check draws
// its shapes and values from `seed` and returns the worst relative error
// |analytic - numeric| / max(|analytic| + |numeric|, kFloor).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wavecomp/layers.hpp"
#include "wavecomp/loss.hpp"
#include "wavecomp/model.hpp"
#include "wavecomp/rng.hpp"

namespace gradcheck {

using wavecomp::Rng;
using wavecomp::nn::Shape;
using wavecomp::nn::Tensor;
using T = Tensor<double>;

inline constexpr double kStep = 1e-5;
inline constexpr double kFloor = 1e-7;

inline double rel_err(double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), kFloor); }

inline T random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  T t(std::move(s));
  for (auto& v : t.values()) v = wavecomp::uniform(rng, lo, hi);
  return t;
}

// Values bounded away from zero so no ReLU kink sits inside the step.
inline T away_from_zero(Shape s, Rng& rng) {
  T t(std::move(s));
  for (auto& v : t.values()) {
    const double m = wavecomp::uniform(rng, 0.05, 1.0);
    v = (rng() & 1) ? m : -m;
  }
  return t;
}

// Distinct values at least 0.01 apart, so each pooling window has a unique max.
inline T distinct_tensor(Shape s, Rng& rng) {
  T t(std::move(s));
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  wavecomp::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < order.size(); ++i) t[order[i]] = 0.01 * static_cast<double>(i) - 1.0;
  return t;
}

inline double dot(const T& a, const T& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Compares `analytic` against the numeric derivative of `loss` w.r.t. `x`.
inline double compare(T& x, const T& analytic, const std::function<double()>& loss) {
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + kStep;
    const double up = loss();
    x[i] = keep - kStep;
    const double down = loss();
    x[i] = keep;
    worst = std::max(worst, rel_err(analytic[i], (up - down) / (2 * kStep)));
  }
  return worst;
}

inline std::size_t dim(Rng& rng, std::size_t lo, std::size_t hi) { return lo + wavecomp::uniform_index(rng, hi - lo + 1); }

inline double conv(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t b = dim(rng, 1, 2), h = dim(rng, 3, 6), w = dim(rng, 3, 6), ci = dim(rng, 1, 3), co = dim(rng, 1, 3);
  const std::size_t k = (rng() & 1) ? 3 : 1;
  T x = random_tensor({b, h, w, ci}, rng), kern = random_tensor({k, k, ci, co}, rng), bias = random_tensor({co}, rng);
  const T r = random_tensor({b, h, w, co}, rng);
  const auto g = wavecomp::nn::conv2d_backward(x, kern, r);
  auto loss = [&] { return dot(wavecomp::nn::conv2d_forward(x, kern, bias), r); };
  return std::max({compare(x, g.input, loss), compare(kern, g.kernels, loss), compare(bias, g.bias, loss)});
}

inline double dense(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t b = dim(rng, 1, 4), din = dim(rng, 1, 12), dout = dim(rng, 1, 8);
  T x = random_tensor({b, din}, rng), wt = random_tensor({din, dout}, rng), bias = random_tensor({dout}, rng);
  const T r = random_tensor({b, dout}, rng);
  const auto g = wavecomp::nn::dense_backward(x, wt, r);
  auto loss = [&] { return dot(wavecomp::nn::dense_forward(x, wt, bias), r); };
  return std::max({compare(x, g.input, loss), compare(wt, g.weights, loss), compare(bias, g.bias, loss)});
}

inline double relu(std::uint64_t seed) {
  Rng rng(seed);
  const Shape s = {dim(rng, 1, 2), dim(rng, 1, 5), dim(rng, 1, 5), dim(rng, 1, 3)};
  T x = away_from_zero(s, rng);
  const T r = random_tensor(s, rng);
  const auto g = wavecomp::nn::relu_backward(x, r);
  return compare(x, g, [&] { return dot(wavecomp::nn::relu_forward(x), r); });
}

inline double maxpool(std::uint64_t seed) {
  Rng rng(seed);
  const Shape s = {dim(rng, 1, 2), dim(rng, 1, 7), dim(rng, 1, 7), dim(rng, 1, 3)};
  T x = distinct_tensor(s, rng);
  const auto fwd = wavecomp::nn::maxpool2x2_forward(x);
  const T r = random_tensor(fwd.output.shape(), rng);
  const auto g = wavecomp::nn::maxpool2x2_backward(r, fwd.argmax, s);
  return compare(x, g, [&] { return dot(wavecomp::nn::maxpool2x2_forward(x).output, r); });
}

inline double dropout(std::uint64_t seed) {
  Rng rng(seed);
  const Shape s = {dim(rng, 1, 3), dim(rng, 1, 9)};
  const double rate = wavecomp::uniform(rng, 0.1, 0.6);
  T x = random_tensor(s, rng), mask;
  const std::uint64_t mask_seed = rng();
  Rng mrng(mask_seed);
  wavecomp::nn::dropout_forward(x, rate, mrng, true, mask);
  const T r = random_tensor(s, rng);
  const auto g = wavecomp::nn::dropout_backward(r, mask);
  return compare(x, g, [&] {
    Rng again(mask_seed);
    T m;
    return dot(wavecomp::nn::dropout_forward(x, rate, again, true, m), r);
  });
}

inline T one_hot_rows(std::size_t b, std::size_t c, Rng& rng) {
  T a({b, c});
  for (std::size_t i = 0; i < b; ++i) a[i * c + wavecomp::uniform_index(rng, c)] = 1.0;
  return a;
}

inline double softmax_loss(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t b = dim(rng, 1, 4), c = dim(rng, 2, 6);
  T z = random_tensor({b, c}, rng, -3.0, 3.0);
  const T a = one_hot_rows(b, c, rng);
  const auto g = wavecomp::nn::cross_entropy_logits_grad(a, z);
  return compare(z, g, [&] { return wavecomp::nn::cross_entropy(a, wavecomp::nn::softmax(z)); });
}

// Whole network in training mode with a fixed dropout mask, input through loss.
inline double model(std::uint64_t seed) {
  using namespace wavecomp::nn;
  Rng rng(seed);
  ModelSpec spec;
  spec.input_height = dim(rng, 4, 7);
  spec.input_width = dim(rng, 4, 7);
  spec.input_channels = 1;
  const std::size_t f = dim(rng, 2, 3), classes = dim(rng, 2, 4);
  const std::size_t ph = (spec.input_height + 1) / 2, pw = (spec.input_width + 1) / 2;
  spec.layers = {LayerSpec::conv(3, 1, f), LayerSpec::of(LayerKind::ReLU),  LayerSpec::of(LayerKind::MaxPool2x2),
                 LayerSpec::dropout(0.2),  LayerSpec::of(LayerKind::Flatten), LayerSpec::dense(ph * pw * f, 6),
                 LayerSpec::of(LayerKind::ReLU), LayerSpec::dense(6, classes), LayerSpec::of(LayerKind::Softmax)};
  Model<double> m(spec, rng());
  const std::uint64_t drop_seed = rng();
  const std::size_t b = dim(rng, 1, 3);
  T x = random_tensor({b, spec.input_height, spec.input_width, 1}, rng);
  const T a = one_hot_rows(b, classes, rng);
  auto loss = [&] {
    m.seed_dropout(drop_seed);
    return cross_entropy(a, softmax(m.forward(x, Mode::Train)));
  };
  m.zero_grad();
  m.seed_dropout(drop_seed);
  const T logits = m.forward(x, Mode::Train);
  const T gx = m.backward(cross_entropy_logits_grad(a, logits));
  std::vector<T> grads;
  for (const auto& p : m.params()) grads.push_back(*p.grad);
  double worst = compare(x, gx, loss);
  auto params = m.params();
  for (std::size_t i = 0; i < params.size(); ++i) worst = std::max(worst, compare(*params[i].value, grads[i], loss));
  return worst;
}

struct Check {
  const char* name;
  double (*run)(std::uint64_t);
};

inline constexpr Check kChecks[] = {{"conv2d", conv},   {"dense", dense},         {"relu", relu},  {"maxpool", maxpool},
                                    {"dropout", dropout}, {"softmax_loss", softmax_loss}, {"model", model}};

}  // namespace gradcheck
