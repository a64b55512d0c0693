#include "cogsr/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogsr/error.hpp"

namespace cogsr::numerics {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + shape_to_string(shape));
  }
}

}  // namespace

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  check_shape(shape);
  auto s = std::make_shared<Storage>();
  s->value.assign(shape_size(shape), value);
  s->shape = std::move(shape);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  check_shape(shape);
  if (values.size() != shape_size(shape)) {
    throw DimensionError("value count " + std::to_string(values.size()) + " does not match shape " +
                         shape_to_string(shape));
  }
  auto s = std::make_shared<Storage>();
  s->shape = std::move(shape);
  s->value = std::move(values);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return full({1}, value, requires_grad);
}

template <typename T>
std::size_t Tensor<T>::rows() const {
  const auto& s = impl_->shape;
  if (s.size() == 1) return 1;
  std::size_t r = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) r *= s[i];
  return r;
}

template <typename T>
std::size_t Tensor<T>::cols() const {
  return impl_->shape.back();
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  return impl_->value[0];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  impl_->requires_grad = on;
}

template <typename T>
std::span<T> Tensor<T>::grad() const {
  if (impl_->grad.size() != impl_->value.size()) impl_->grad.assign(impl_->value.size(), T(0));
  return impl_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  auto s = std::make_shared<Storage>();
  s->shape = impl_->shape;
  s->value = impl_->value;
  s->requires_grad = false;
  return Tensor(std::move(s));
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(impl_->value.begin(), impl_->value.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace cogsr::numerics
