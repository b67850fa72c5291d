#pragma once

#include "wavecomp/tensor.hpp"

namespace wavecomp::nn {

// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-12;

// Per-sample loss over N classes, averaged over the batch:
//   -(1/N) * sum_i [a_i log p_i + (1 - a_i) log(1 - p_i)]
// actual and predicted are (B, N). Evaluated in double precision.
template <typename T>
double cross_entropy(const Tensor<T>& actual, const Tensor<T>& predicted);

// d(loss)/d(predicted); zero where the clamp is active.
template <typename T>
Tensor<T> cross_entropy_grad(const Tensor<T>& actual, const Tensor<T>& predicted);

// d(loss)/d(logits) where predicted = softmax(logits), pushed through the
// softmax Jacobian: dz_j = p_j * (g_j - sum_i p_i g_i).
template <typename T>
Tensor<T> softmax_cross_entropy_grad(const Tensor<T>& actual, const Tensor<T>& predicted);

// Same derivative computed from the logits in double precision. Stays
// informative when the softmax saturates: 1 - p_i is formed from the other
// classes' mass instead of by subtraction, and the true-class term needs
// no division by p.
template <typename T>
Tensor<T> cross_entropy_logits_grad(const Tensor<T>& actual, const Tensor<T>& logits);

}  // namespace wavecomp::nn
