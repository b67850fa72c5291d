#pragma once

#include <cstdint>
#include <vector>

#include "wavecomp/rng.hpp"
#include "wavecomp/tensor.hpp"

namespace wavecomp::nn {

// Kernels operate on NHWC batches. Convolution is stride 1 with zero "same"
// padding and an odd k x k kernel stored as (k, k, Cin, Cout).

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> kernels;
  Tensor<T> bias;
};

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& grad_out);

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

// 2x2 window, stride 2, ceil on odd extents (missing cells act as -inf).
// Ties resolve to the first maximal element in row-major window order.
template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                              const Shape& input_shape);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out);

// Inverted dropout. In training mode each unit is kept with probability
// 1 - rate and scaled by 1 / (1 - rate); `mask` receives the per-unit factor.
// Eval mode (or rate 0) is the identity and leaves mask all ones.
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, Rng& rng, bool training, Tensor<T>& mask);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const Tensor<T>& mask);

// input (B, Din), weights (Din, Dout), bias (Dout).
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias);

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& grad_out);

// Row-wise softmax of (B, C) logits with max subtraction.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

namespace reference {

// Direct nested-loop serial kernels; baseline for tests and the kernel bench.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias);

}  // namespace reference

}  // namespace wavecomp::nn
