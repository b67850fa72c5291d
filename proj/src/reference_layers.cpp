#include "wavecomp/error.hpp"
#include "wavecomp/layers.hpp"

namespace wavecomp::nn::reference {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias) {
  const std::size_t B = input.dim(0), H = input.dim(1), W = input.dim(2), Cin = input.dim(3);
  const std::size_t k = kernels.dim(0), Cout = kernels.dim(3);
  if (kernels.dim(2) != Cin || k % 2 == 0) throw NnError(NnErrc::ShapeMismatch, "reference conv2d shapes");
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  Tensor<T> out({B, H, W, Cout});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        for (std::size_t o = 0; o < Cout; ++o) {
          T acc = bias[o];
          for (std::size_t dy = 0; dy < k; ++dy)
            for (std::size_t dx = 0; dx < k; ++dx) {
              const auto sy = static_cast<std::ptrdiff_t>(y + dy) - pad;
              const auto sx = static_cast<std::ptrdiff_t>(x + dx) - pad;
              if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(H) || sx >= static_cast<std::ptrdiff_t>(W))
                continue;
              for (std::size_t c = 0; c < Cin; ++c)
                acc += input[((b * H + static_cast<std::size_t>(sy)) * W + static_cast<std::size_t>(sx)) * Cin + c] *
                       kernels[((dy * k + dx) * Cin + c) * Cout + o];
            }
          out[((b * H + y) * W + x) * Cout + o] = acc;
        }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& grad_out) {
  const std::size_t B = input.dim(0), H = input.dim(1), W = input.dim(2), Cin = input.dim(3);
  const std::size_t k = kernels.dim(0), Cout = kernels.dim(3);
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  ConvGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(kernels.shape()), Tensor<T>({Cout})};
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        for (std::size_t o = 0; o < Cout; ++o) {
          const T go = grad_out[((b * H + y) * W + x) * Cout + o];
          g.bias[o] += go;
          for (std::size_t dy = 0; dy < k; ++dy)
            for (std::size_t dx = 0; dx < k; ++dx) {
              const auto sy = static_cast<std::ptrdiff_t>(y + dy) - pad;
              const auto sx = static_cast<std::ptrdiff_t>(x + dx) - pad;
              if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(H) || sx >= static_cast<std::ptrdiff_t>(W))
                continue;
              for (std::size_t c = 0; c < Cin; ++c) {
                const std::size_t in_idx =
                    ((b * H + static_cast<std::size_t>(sy)) * W + static_cast<std::size_t>(sx)) * Cin + c;
                const std::size_t k_idx = ((dy * k + dx) * Cin + c) * Cout + o;
                g.kernels[k_idx] += input[in_idx] * go;
                g.input[in_idx] += kernels[k_idx] * go;
              }
            }
        }
  return g;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias) {
  const std::size_t B = input.dim(0), Din = weights.dim(0), Dout = weights.dim(1);
  if (input.dim(1) != Din) throw NnError(NnErrc::ShapeMismatch, "reference dense shapes");
  Tensor<T> out({B, Dout});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < Dout; ++o) {
      T acc = bias[o];
      for (std::size_t i = 0; i < Din; ++i) acc += input[b * Din + i] * weights[i * Dout + o];
      out[b * Dout + o] = acc;
    }
  return out;
}

template Tensor<float> conv2d_forward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&);
template Tensor<double> conv2d_forward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&);
template ConvGrads<float> conv2d_backward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&);
template ConvGrads<double> conv2d_backward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&);
template Tensor<float> dense_forward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&);
template Tensor<double> dense_forward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&);

}  // namespace wavecomp::nn::reference
