#include "wavecomp/model.hpp"

#include <cmath>

#include "wavecomp/error.hpp"
#include "wavecomp/layers.hpp"

namespace wavecomp::nn {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool2x2: return "maxpool2x2";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

LayerSpec LayerSpec::conv(std::size_t kernel, std::size_t cin, std::size_t cout) {
  LayerSpec s;
  s.kind = LayerKind::Conv2D;
  s.kernel = kernel;
  s.in_channels = cin;
  s.out_channels = cout;
  s.padding = kernel / 2;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.in_channels = in;
  s.out_channels = out;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.dropout_rate = rate;
  return s;
}

LayerSpec LayerSpec::of(LayerKind kind) {
  LayerSpec s;
  s.kind = kind;
  if (kind == LayerKind::MaxPool2x2) s.stride = 2;
  return s;
}

std::size_t LayerSpec::parameter_count() const {
  switch (kind) {
    case LayerKind::Conv2D: return kernel * kernel * in_channels * out_channels + out_channels;
    case LayerKind::Dense: return in_channels * out_channels + out_channels;
    default: return 0;
  }
}

std::vector<Shape> ModelSpec::shape_flow() const {
  if (input_height == 0 || input_width == 0 || input_channels == 0)
    throw NnError(NnErrc::InputTooSmall, "input extent " + std::to_string(input_height) + "x" + std::to_string(input_width));
  Shape cur{1, input_height, input_width, input_channels};
  std::vector<Shape> flow;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
    const bool spatial = cur.size() == 4;
    switch (l.kind) {
      case LayerKind::Conv2D:
        if (!spatial || cur[3] != l.in_channels || l.kernel % 2 == 0 || l.stride != 1 || l.padding != l.kernel / 2)
          throw NnError(NnErrc::ShapeMismatch, where + ": incompatible with input " + to_string(cur));
        cur[3] = l.out_channels;
        break;
      case LayerKind::MaxPool2x2:
        if (!spatial) throw NnError(NnErrc::ShapeMismatch, where + ": needs a spatial input");
        cur[1] = (cur[1] + 1) / 2;
        cur[2] = (cur[2] + 1) / 2;
        break;
      case LayerKind::Flatten:
        cur = Shape{1, element_count(cur)};
        break;
      case LayerKind::Dense:
        if (cur.size() != 2 || cur[1] != l.in_channels)
          throw NnError(NnErrc::ShapeMismatch, where + ": expects " + std::to_string(l.in_channels) + " inputs, got " + to_string(cur));
        cur[1] = l.out_channels;
        break;
      case LayerKind::Dropout:
        if (!(l.dropout_rate >= 0.0 && l.dropout_rate < 1.0))
          throw NnError(NnErrc::BadConfig, where + ": rate must be in [0, 1)");
        break;
      case LayerKind::Softmax:
        if (i + 1 != layers.size() || cur.size() != 2)
          throw NnError(NnErrc::ShapeMismatch, where + ": softmax must be the final layer over (B, C)");
        break;
      case LayerKind::ReLU:
        break;
    }
    flow.push_back(cur);
  }
  return flow;
}

std::size_t ModelSpec::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

std::size_t ModelSpec::output_units() const {
  const auto flow = shape_flow();
  if (flow.empty() || flow.back().size() != 2) throw NnError(NnErrc::ShapeMismatch, "model does not end in (B, C)");
  return flow.back()[1];
}

template <typename T>
Model<T>::Model(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)), dropout_rng_(mix_seed(init_seed, 1)) {
  spec_.shape_flow();
  Rng rng(init_seed);
  for (const auto& ls : spec_.layers) {
    Layer layer;
    layer.spec = ls;
    if (ls.kind == LayerKind::Conv2D || ls.kind == LayerKind::Dense) {
      const bool conv = ls.kind == LayerKind::Conv2D;
      Shape wshape = conv ? Shape{ls.kernel, ls.kernel, ls.in_channels, ls.out_channels}
                          : Shape{ls.in_channels, ls.out_channels};
      const double fan_in = conv ? static_cast<double>(ls.kernel * ls.kernel * ls.in_channels)
                                 : static_cast<double>(ls.in_channels);
      const double fan_out = static_cast<double>(ls.out_channels);
      const double limit = conv ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
      layer.weights = Tensor<T>(wshape);
      for (auto& w : layer.weights.values()) w = static_cast<T>(uniform(rng, -limit, limit));
      layer.bias = Tensor<T>({ls.out_channels});
      layer.grad_weights = Tensor<T>(wshape);
      layer.grad_bias = Tensor<T>({ls.out_channels});
    }
    layers_.push_back(std::move(layer));
  }
}

template <typename T>
Tensor<T> Model<T>::softmax_of(const Tensor<T>& logits) {
  return softmax(logits);
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input, Mode mode) {
  expect_shape(input, {input.rank() == 4 ? input.dim(0) : 0, spec_.input_height, spec_.input_width, spec_.input_channels},
               "model input");
  Tensor<T> x = input;
  for (auto& layer : layers_) {
    switch (layer.spec.kind) {
      case LayerKind::Conv2D:
        layer.cached_input = std::move(x);
        x = conv2d_forward(layer.cached_input, layer.weights, layer.bias);
        break;
      case LayerKind::ReLU:
        layer.cached_input = std::move(x);
        x = relu_forward(layer.cached_input);
        break;
      case LayerKind::MaxPool2x2: {
        layer.input_shape = x.shape();
        auto r = maxpool2x2_forward(x);
        layer.argmax = std::move(r.argmax);
        x = std::move(r.output);
        break;
      }
      case LayerKind::Dropout:
        x = dropout_forward(x, layer.spec.dropout_rate, dropout_rng_, mode == Mode::Train, layer.mask);
        break;
      case LayerKind::Flatten: {
        layer.input_shape = x.shape();
        const std::size_t b = x.dim(0);
        x.reshape({b, x.size() / b});
        break;
      }
      case LayerKind::Dense:
        layer.cached_input = std::move(x);
        x = dense_forward(layer.cached_input, layer.weights, layer.bias);
        break;
      case LayerKind::Softmax:
        break;
    }
  }
  check_finite(x, "model logits");
  return x;
}

template <typename T>
Tensor<T> Model<T>::backward(const Tensor<T>& grad_logits) {
  Tensor<T> g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    Layer& layer = *it;
    switch (layer.spec.kind) {
      case LayerKind::Conv2D: {
        auto cg = conv2d_backward(layer.cached_input, layer.weights, g);
        for (std::size_t i = 0; i < cg.kernels.size(); ++i) layer.grad_weights[i] += cg.kernels[i];
        for (std::size_t i = 0; i < cg.bias.size(); ++i) layer.grad_bias[i] += cg.bias[i];
        g = std::move(cg.input);
        break;
      }
      case LayerKind::ReLU:
        g = relu_backward(layer.cached_input, g);
        break;
      case LayerKind::MaxPool2x2:
        g = maxpool2x2_backward(g, layer.argmax, layer.input_shape);
        break;
      case LayerKind::Dropout:
        g = dropout_backward(g, layer.mask);
        break;
      case LayerKind::Flatten:
        g.reshape(layer.input_shape);
        break;
      case LayerKind::Dense: {
        auto dg = dense_backward(layer.cached_input, layer.weights, g);
        for (std::size_t i = 0; i < dg.weights.size(); ++i) layer.grad_weights[i] += dg.weights[i];
        for (std::size_t i = 0; i < dg.bias.size(); ++i) layer.grad_bias[i] += dg.bias[i];
        g = std::move(dg.input);
        break;
      }
      case LayerKind::Softmax:
        break;
    }
  }
  return g;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& l : layers_) {
    l.grad_weights.fill(T{0});
    l.grad_bias.fill(T{0});
  }
}

template <typename T>
std::vector<ParamRef<T>> Model<T>::params() {
  std::vector<ParamRef<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    if (l.spec.kind != LayerKind::Conv2D && l.spec.kind != LayerKind::Dense) continue;
    const std::string prefix = "layer" + std::to_string(i) + "." + to_string(l.spec.kind);
    out.push_back({&l.weights, &l.grad_weights, prefix + ".weights"});
    out.push_back({&l.bias, &l.grad_bias, prefix + ".bias"});
  }
  return out;
}

template class Model<float>;
template class Model<double>;

}  // namespace wavecomp::nn
