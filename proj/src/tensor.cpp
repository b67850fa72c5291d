#include "wavecomp/tensor.hpp"

#include <cmath>

#include "wavecomp/error.hpp"

namespace wavecomp::nn {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_))
    throw NnError(NnErrc::ShapeMismatch, std::to_string(data_.size()) + " values for shape " + to_string(shape_));
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
  if (element_count(shape) != data_.size())
    throw NnError(NnErrc::ShapeMismatch, "cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  shape_ = std::move(shape);
}

template <typename T>
void check_finite(const Tensor<T>& t, std::string_view where) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(t[i]))
      throw NnError(NnErrc::NonFinite, std::string(where) + ": non-finite value at element " + std::to_string(i));
}

template <typename T>
void expect_shape(const Tensor<T>& t, const Shape& expected, std::string_view where) {
  if (t.shape() != expected)
    throw NnError(NnErrc::ShapeMismatch,
                  std::string(where) + ": got " + to_string(t.shape()) + ", expected " + to_string(expected));
}

template class Tensor<float>;
template class Tensor<double>;
template void check_finite(const Tensor<float>&, std::string_view);
template void check_finite(const Tensor<double>&, std::string_view);
template void expect_shape(const Tensor<float>&, const Shape&, std::string_view);
template void expect_shape(const Tensor<double>&, const Shape&, std::string_view);

}  // namespace wavecomp::nn
