#include "wavecomp/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavecomp/error.hpp"
#include "wavecomp/parallel.hpp"

namespace wavecomp::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// Images per GEMM chunk. Depends only on the spatial extent, never on the
// thread count, so summation order is fixed.
constexpr std::size_t kChunkRows = 4096;

struct ConvGeometry {
  std::size_t batch, height, width, cin, cout, k, pad;
  std::size_t patch() const { return k * k * cin; }
  std::size_t pixels() const { return height * width; }
  std::size_t images_per_chunk() const { return std::max<std::size_t>(1, kChunkRows / pixels()); }
  std::size_t chunks() const { return (batch + images_per_chunk() - 1) / images_per_chunk(); }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& kernels) {
  if (input.rank() != 4 || kernels.rank() != 4)
    throw NnError(NnErrc::ShapeMismatch, "conv2d expects (B,H,W,C) input and (k,k,Cin,Cout) kernels");
  const std::size_t k = kernels.dim(0);
  if (k != kernels.dim(1) || k % 2 == 0)
    throw NnError(NnErrc::ShapeMismatch, "conv2d kernel must be square with odd extent, got " + to_string(kernels.shape()));
  if (kernels.dim(2) != input.dim(3))
    throw NnError(NnErrc::ShapeMismatch,
                  "conv2d input channels " + std::to_string(input.dim(3)) + " vs kernel " + to_string(kernels.shape()));
  return {input.dim(0), input.dim(1), input.dim(2), input.dim(3), kernels.dim(3), k, k / 2};
}

// Patch matrix for images [b0, b1): one row per output pixel, columns ordered
// (dy, dx, c) to match the kernel layout.
template <typename T>
void im2col(const ConvGeometry& g, const T* input, std::size_t b0, std::size_t b1, T* cols) {
  const std::size_t patch = g.patch();
  for (std::size_t b = b0; b < b1; ++b) {
    const T* img = input + b * g.pixels() * g.cin;
    for (std::size_t y = 0; y < g.height; ++y) {
      for (std::size_t x = 0; x < g.width; ++x) {
        T* row = cols + (((b - b0) * g.height + y) * g.width + x) * patch;
        for (std::size_t dy = 0; dy < g.k; ++dy) {
          const auto sy = static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(g.pad);
          for (std::size_t dx = 0; dx < g.k; ++dx) {
            const auto sx = static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(g.pad);
            T* dst = row + (dy * g.k + dx) * g.cin;
            if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(g.height) ||
                sx >= static_cast<std::ptrdiff_t>(g.width)) {
              std::fill_n(dst, g.cin, T{0});
            } else {
              std::copy_n(img + (static_cast<std::size_t>(sy) * g.width + static_cast<std::size_t>(sx)) * g.cin, g.cin, dst);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* cols, std::size_t b0, std::size_t b1, T* grad_input) {
  const std::size_t patch = g.patch();
  for (std::size_t b = b0; b < b1; ++b) {
    T* img = grad_input + b * g.pixels() * g.cin;
    for (std::size_t y = 0; y < g.height; ++y) {
      for (std::size_t x = 0; x < g.width; ++x) {
        const T* row = cols + (((b - b0) * g.height + y) * g.width + x) * patch;
        for (std::size_t dy = 0; dy < g.k; ++dy) {
          const auto sy = static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(g.pad);
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          for (std::size_t dx = 0; dx < g.k; ++dx) {
            const auto sx = static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(g.pad);
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(g.width)) continue;
            const T* src = row + (dy * g.k + dx) * g.cin;
            T* dst = img + (static_cast<std::size_t>(sy) * g.width + static_cast<std::size_t>(sx)) * g.cin;
            for (std::size_t c = 0; c < g.cin; ++c) dst[c] += src[c];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias) {
  const ConvGeometry g = conv_geometry(input, kernels);
  expect_shape(bias, {g.cout}, "conv2d bias");
  Tensor<T> out({g.batch, g.height, g.width, g.cout});
  const std::size_t per = g.images_per_chunk();
  const std::size_t chunks = g.chunks();
  const ConstMatMap<T> w(kernels.data(), static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.cout));
  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias.data(), static_cast<Eigen::Index>(g.cout));

#pragma omp parallel num_threads(worker_threads())
  {
    std::vector<T> cols;
#pragma omp for schedule(static)
    for (std::size_t ch = 0; ch < chunks; ++ch) {
      const std::size_t b0 = ch * per;
      const std::size_t b1 = std::min(g.batch, b0 + per);
      const std::size_t rows = (b1 - b0) * g.pixels();
      cols.resize(rows * g.patch());
      im2col(g, input.data(), b0, b1, cols.data());
      const ConstMatMap<T> a(cols.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(g.patch()));
      MatMap<T> o(out.data() + b0 * g.pixels() * g.cout, static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(g.cout));
      o.noalias() = a * w;
      o.rowwise() += b;
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& grad_out) {
  const ConvGeometry g = conv_geometry(input, kernels);
  expect_shape(grad_out, {g.batch, g.height, g.width, g.cout}, "conv2d grad_out");
  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(kernels.shape()), Tensor<T>({g.cout})};
  const std::size_t per = g.images_per_chunk();
  const std::size_t chunks = g.chunks();
  const std::size_t patch = g.patch();
  const ConstMatMap<T> w(kernels.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(g.cout));
  std::vector<RowMat<T>> partial_w(chunks);
  std::vector<Eigen::Matrix<T, 1, Eigen::Dynamic>> partial_b(chunks);

#pragma omp parallel num_threads(worker_threads())
  {
    std::vector<T> cols;
    RowMat<T> dcols;
#pragma omp for schedule(static)
    for (std::size_t ch = 0; ch < chunks; ++ch) {
      const std::size_t b0 = ch * per;
      const std::size_t b1 = std::min(g.batch, b0 + per);
      const auto rows = static_cast<Eigen::Index>((b1 - b0) * g.pixels());
      cols.resize(static_cast<std::size_t>(rows) * patch);
      im2col(g, input.data(), b0, b1, cols.data());
      const ConstMatMap<T> a(cols.data(), rows, static_cast<Eigen::Index>(patch));
      const ConstMatMap<T> go(grad_out.data() + b0 * g.pixels() * g.cout, rows, static_cast<Eigen::Index>(g.cout));
      partial_w[ch].noalias() = a.transpose() * go;
      partial_b[ch] = go.colwise().sum();
      dcols.noalias() = go * w.transpose();
      col2im(g, dcols.data(), b0, b1, grads.input.data());
    }
  }
  MatMap<T> dw(grads.kernels.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(g.cout));
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(grads.bias.data(), static_cast<Eigen::Index>(g.cout));
  dw.setZero();
  db.setZero();
  for (std::size_t ch = 0; ch < chunks; ++ch) {
    dw += partial_w[ch];
    db += partial_b[ch];
  }
  return grads;
}

template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input) {
  if (input.rank() != 4) throw NnError(NnErrc::ShapeMismatch, "maxpool expects (B,H,W,C), got " + to_string(input.shape()));
  const std::size_t B = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
  const std::size_t Ho = (H + 1) / 2, Wo = (W + 1) / 2;
  if (input.size() > std::numeric_limits<std::uint32_t>::max())
    throw NnError(NnErrc::ShapeMismatch, "maxpool input too large");
  PoolResult<T> r{Tensor<T>({B, Ho, Wo, C}), std::vector<std::uint32_t>(B * Ho * Wo * C)};
#pragma omp parallel for schedule(static) num_threads(worker_threads())
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t y = 0; y < Ho; ++y) {
      for (std::size_t x = 0; x < Wo; ++x) {
        for (std::size_t c = 0; c < C; ++c) {
          std::size_t best = ((b * H + 2 * y) * W + 2 * x) * C + c;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            const std::size_t sy = 2 * y + dy;
            if (sy >= H) break;
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t sx = 2 * x + dx;
              if (sx >= W) break;
              const std::size_t idx = ((b * H + sy) * W + sx) * C + c;
              if (input[idx] > input[best]) best = idx;
            }
          }
          const std::size_t o = ((b * Ho + y) * Wo + x) * C + c;
          r.output[o] = input[best];
          r.argmax[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                              const Shape& input_shape) {
  if (argmax.size() != grad_out.size())
    throw NnError(NnErrc::ShapeMismatch, "maxpool backward: argmax/grad size mismatch");
  Tensor<T> grad_in(input_shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in[argmax[i]] += grad_out[i];
  return grad_in;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T{0} ? input[i] : T{0};
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  expect_shape(grad_out, input.shape(), "relu grad_out");
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T{0} ? grad_out[i] : T{0};
  return out;
}

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, Rng& rng, bool training, Tensor<T>& mask) {
  if (!(rate >= 0.0 && rate < 1.0)) throw NnError(NnErrc::BadConfig, "dropout rate must be in [0, 1)");
  mask = Tensor<T>(input.shape(), T{1});
  if (!training || rate == 0.0) return input;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    mask[i] = uniform01(rng) < rate ? T{0} : keep_scale;
    out[i] = input[i] * mask[i];
  }
  return out;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const Tensor<T>& mask) {
  expect_shape(grad_out, mask.shape(), "dropout grad_out");
  Tensor<T> out(grad_out.shape());
  for (std::size_t i = 0; i < grad_out.size(); ++i) out[i] = grad_out[i] * mask[i];
  return out;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias) {
  if (input.rank() != 2 || weights.rank() != 2 || input.dim(1) != weights.dim(0))
    throw NnError(NnErrc::ShapeMismatch,
                  "dense input " + to_string(input.shape()) + " vs weights " + to_string(weights.shape()));
  expect_shape(bias, {weights.dim(1)}, "dense bias");
  const auto B = static_cast<Eigen::Index>(input.dim(0));
  const auto Din = static_cast<Eigen::Index>(weights.dim(0));
  const auto Dout = static_cast<Eigen::Index>(weights.dim(1));
  Tensor<T> out({input.dim(0), weights.dim(1)});
  MatMap<T> o(out.data(), B, Dout);
  o.noalias() = ConstMatMap<T>(input.data(), B, Din) * ConstMatMap<T>(weights.data(), Din, Dout);
  o.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.data(), Dout);
  return out;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& grad_out) {
  expect_shape(grad_out, {input.dim(0), weights.dim(1)}, "dense grad_out");
  const auto B = static_cast<Eigen::Index>(input.dim(0));
  const auto Din = static_cast<Eigen::Index>(weights.dim(0));
  const auto Dout = static_cast<Eigen::Index>(weights.dim(1));
  DenseGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(weights.shape()), Tensor<T>({weights.dim(1)})};
  const ConstMatMap<T> x(input.data(), B, Din);
  const ConstMatMap<T> w(weights.data(), Din, Dout);
  const ConstMatMap<T> go(grad_out.data(), B, Dout);
  MatMap<T>(g.weights.data(), Din, Dout).noalias() = x.transpose() * go;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(g.bias.data(), Dout) = go.colwise().sum();
  MatMap<T>(g.input.data(), B, Din).noalias() = go * w.transpose();
  return g;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw NnError(NnErrc::ShapeMismatch, "softmax expects (B, C), got " + to_string(logits.shape()));
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  Tensor<T> out(logits.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const T* z = logits.data() + b * C;
    T* p = out.data() + b * C;
    const T m = *std::max_element(z, z + C);
    T sum{0};
    for (std::size_t c = 0; c < C; ++c) {
      p[c] = std::exp(z[c] - m);
      sum += p[c];
    }
    for (std::size_t c = 0; c < C; ++c) p[c] /= sum;
  }
  return out;
}

#define WAVECOMP_INSTANTIATE(T)                                                                              \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                  \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
  template PoolResult<T> maxpool2x2_forward(const Tensor<T>&);                                               \
  template Tensor<T> maxpool2x2_backward(const Tensor<T>&, const std::vector<std::uint32_t>&, const Shape&); \
  template Tensor<T> relu_forward(const Tensor<T>&);                                                         \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> dropout_forward(const Tensor<T>&, double, Rng&, bool, Tensor<T>&);                      \
  template Tensor<T> dropout_backward(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                   \
  template DenseGrads<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> softmax(const Tensor<T>&);

WAVECOMP_INSTANTIATE(float)
WAVECOMP_INSTANTIATE(double)

#undef WAVECOMP_INSTANTIATE

}  // namespace wavecomp::nn
