#include "wavecomp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wavecomp/error.hpp"

namespace wavecomp::nn {

namespace {

template <typename T>
void check_pair(const Tensor<T>& actual, const Tensor<T>& predicted) {
  if (predicted.rank() != 2) throw NnError(NnErrc::ShapeMismatch, "loss expects (B, N), got " + to_string(predicted.shape()));
  expect_shape(actual, predicted.shape(), "loss targets");
}

}  // namespace

template <typename T>
double cross_entropy(const Tensor<T>& actual, const Tensor<T>& predicted) {
  check_pair(actual, predicted);
  const std::size_t B = predicted.dim(0), N = predicted.dim(1);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    double sample = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double a = static_cast<double>(actual[b * N + i]);
      const double p = std::clamp(static_cast<double>(predicted[b * N + i]), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
      sample += a * std::log(p) + (1.0 - a) * std::log(1.0 - p);
    }
    total += -sample / static_cast<double>(N);
  }
  return B ? total / static_cast<double>(B) : 0.0;
}

template <typename T>
Tensor<T> cross_entropy_grad(const Tensor<T>& actual, const Tensor<T>& predicted) {
  check_pair(actual, predicted);
  const std::size_t B = predicted.dim(0), N = predicted.dim(1);
  Tensor<T> g(predicted.shape());
  const double scale = 1.0 / (static_cast<double>(N) * static_cast<double>(B));
  for (std::size_t k = 0; k < B * N; ++k) {
    const double p = static_cast<double>(predicted[k]);
    if (p < kProbabilityEpsilon || p > 1.0 - kProbabilityEpsilon) continue;
    const double a = static_cast<double>(actual[k]);
    g[k] = static_cast<T>(-scale * (a / p - (1.0 - a) / (1.0 - p)));
  }
  return g;
}

template <typename T>
Tensor<T> softmax_cross_entropy_grad(const Tensor<T>& actual, const Tensor<T>& predicted) {
  const Tensor<T> gp = cross_entropy_grad(actual, predicted);
  const std::size_t B = predicted.dim(0), N = predicted.dim(1);
  Tensor<T> gz(predicted.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const T* p = predicted.data() + b * N;
    const T* g = gp.data() + b * N;
    double dot = 0.0;
    for (std::size_t i = 0; i < N; ++i) dot += static_cast<double>(p[i]) * static_cast<double>(g[i]);
    for (std::size_t j = 0; j < N; ++j)
      gz[b * N + j] = static_cast<T>(static_cast<double>(p[j]) * (static_cast<double>(g[j]) - dot));
  }
  return gz;
}

template <typename T>
Tensor<T> cross_entropy_logits_grad(const Tensor<T>& actual, const Tensor<T>& logits) {
  check_pair(actual, logits);
  const std::size_t B = logits.dim(0), N = logits.dim(1);
  const double inv_n = 1.0 / static_cast<double>(N);
  const double inv_b = 1.0 / static_cast<double>(B);
  Tensor<T> gz(logits.shape());
  std::vector<double> e(N), q(N);
  for (std::size_t b = 0; b < B; ++b) {
    const T* z = logits.data() + b * N;
    const double zmax = static_cast<double>(*std::max_element(z, z + N));
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) sum += (e[i] = std::exp(static_cast<double>(z[i]) - zmax));
    // q_i = p_i * dL/dp_i with 1 - p_i taken as the mass of the other classes.
    double qsum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double a = static_cast<double>(actual[b * N + i]);
      const double p = e[i] / sum;
      const double rest = std::max((sum - e[i]) / sum, kProbabilityEpsilon);
      q[i] = -inv_n * (a - (1.0 - a) * p / rest);
      qsum += q[i];
    }
    for (std::size_t j = 0; j < N; ++j) gz[b * N + j] = static_cast<T>(inv_b * (q[j] - e[j] / sum * qsum));
  }
  return gz;
}

template double cross_entropy(const Tensor<float>&, const Tensor<float>&);
template double cross_entropy(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> cross_entropy_grad(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> cross_entropy_grad(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> softmax_cross_entropy_grad(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> softmax_cross_entropy_grad(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> cross_entropy_logits_grad(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> cross_entropy_logits_grad(const Tensor<double>&, const Tensor<double>&);

}  // namespace wavecomp::nn
