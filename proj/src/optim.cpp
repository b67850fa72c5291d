#include "wavecomp/optim.hpp"

#include <cmath>

#include "wavecomp/error.hpp"

namespace wavecomp::nn {

template <typename T>
void Adam<T>::step(std::span<const ParamRef<T>> params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value->shape());
      v_.emplace_back(p.value->shape());
    }
  }
  if (m_.size() != params.size()) throw NnError(NnErrc::ShapeMismatch, "Adam: parameter list changed between steps");
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate, eps = config_.epsilon;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& w = *params[k].value;
    const Tensor<T>& g = *params[k].grad;
    expect_shape(g, w.shape(), "Adam gradient " + params[k].name);
    expect_shape(m_[k], w.shape(), "Adam moment " + params[k].name);
    T* m = m_[k].data();
    T* v = v_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
      const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + eps);
      w[i] = static_cast<T>(static_cast<double>(w[i]) - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace wavecomp::nn
