#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavecomp/optim.hpp"
#include "wavecomp/rng.hpp"
#include "wavecomp/tensor.hpp"

namespace wavecomp::nn {

enum class Mode { Train, Eval };

enum class LayerKind : std::uint8_t { Conv2D = 1, ReLU = 2, MaxPool2x2 = 3, Dropout = 4, Flatten = 5, Dense = 6, Softmax = 7 };

const char* to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t kernel = 0;        // conv: spatial extent (odd)
  std::size_t in_channels = 0;   // conv: Cin; dense: input units
  std::size_t out_channels = 0;  // conv: Cout; dense: output units
  std::size_t stride = 1;
  std::size_t padding = 0;
  double dropout_rate = 0.0;

  static LayerSpec conv(std::size_t kernel, std::size_t cin, std::size_t cout);
  static LayerSpec dense(std::size_t in, std::size_t out);
  static LayerSpec dropout(double rate);
  static LayerSpec of(LayerKind kind);

  std::size_t parameter_count() const;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSpec {
  std::size_t input_height = 0;
  std::size_t input_width = 0;
  std::size_t input_channels = 1;
  std::vector<LayerSpec> layers;

  // Output shape for a batch of one after each layer; throws ShapeMismatch
  // or InputTooSmall if the descriptors do not chain.
  std::vector<Shape> shape_flow() const;
  std::size_t parameter_count() const;
  std::size_t output_units() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Sequential network over NHWC input. A trailing Softmax layer is not applied
// by forward(); callers use predict() or pair the logits with the loss.
template <typename T>
class Model {
 public:
  // He-uniform conv weights, Xavier-uniform dense weights, zero biases.
  Model(ModelSpec spec, std::uint64_t init_seed);

  const ModelSpec& spec() const noexcept { return spec_; }

  Tensor<T> forward(const Tensor<T>& input, Mode mode);
  Tensor<T> predict(const Tensor<T>& input) { return softmax_of(forward(input, Mode::Eval)); }

  // Back-propagates d(loss)/d(logits) from the most recent forward() and
  // accumulates parameter gradients. Returns d(loss)/d(input).
  Tensor<T> backward(const Tensor<T>& grad_logits);

  void zero_grad();
  std::vector<ParamRef<T>> params();
  std::size_t parameter_count() const { return spec_.parameter_count(); }
  void seed_dropout(std::uint64_t seed) { dropout_rng_.seed(seed); }

 private:
  struct Layer {
    LayerSpec spec;
    Tensor<T> weights, bias, grad_weights, grad_bias;
    Tensor<T> cached_input;
    Tensor<T> mask;
    std::vector<std::uint32_t> argmax;
    Shape input_shape;
  };

  static Tensor<T> softmax_of(const Tensor<T>& logits);

  ModelSpec spec_;
  std::vector<Layer> layers_;
  Rng dropout_rng_;
};

struct CheckpointMeta {
  int resolution = 0;  // 0 = full image
  int levels = 0;
  std::vector<std::string> classes;
  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

// "WCNN" | u16 version | u8 scalar bytes | model spec | meta | parameter
// tensors in declaration order as raw little-endian values.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, Model<T>& model, const CheckpointMeta& meta);

template <typename T>
struct LoadedCheckpoint {
  Model<T> model;
  CheckpointMeta meta;
};

// Values stored at the other precision are converted.
template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace wavecomp::nn
