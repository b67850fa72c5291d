#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavecomp/tensor.hpp"

namespace wavecomp::nn {

template <typename T>
struct ParamRef {
  Tensor<T>* value;
  Tensor<T>* grad;
  std::string name;
};

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moments are created zeroed on the first step and
// must keep matching the parameter shapes afterwards.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<const ParamRef<T>> params);

  std::uint64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }
  const std::vector<Tensor<T>>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor<T>>& second_moments() const noexcept { return v_; }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
};

}  // namespace wavecomp::nn
