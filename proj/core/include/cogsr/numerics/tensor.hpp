#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cogsr::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major array with an optional gradient buffer.
//
// Tensor is a shared handle: copies alias the same storage, which is what the
// tape relies on to route gradients back to parameters. Use clone() for a
// deep copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }

  const Shape& shape() const { return impl_->shape; }
  std::size_t ndim() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->value.size(); }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  // 2-D helpers; a 1-D tensor is treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<T> data() { return impl_->value; }
  std::span<const T> data() const { return impl_->value; }
  std::vector<T>& values() { return impl_->value; }
  const std::vector<T>& values() const { return impl_->value; }

  T& operator[](std::size_t i) { return impl_->value[i]; }
  const T& operator[](std::size_t i) const { return impl_->value[i]; }
  T& at(std::size_t r, std::size_t c) { return impl_->value[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const { return impl_->value[r * cols() + c]; }

  // Value of a single-element tensor.
  T item() const;

  bool requires_grad() const noexcept { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool on);

  // Gradient buffer; allocated (zeroed) on first access. The handle is a
  // reference to shared storage, so a const handle still hands out a writable
  // gradient (backward rules accumulate through captured handles).
  std::span<T> grad() const;
  bool has_grad() const noexcept { return impl_ && !impl_->grad.empty(); }
  void zero_grad();

  Tensor clone() const;
  Tensor detach() const { return clone(); }

  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

  // True when every value is finite.
  bool all_finite() const;

 private:
  struct Storage {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
  };

  explicit Tensor(std::shared_ptr<Storage> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Storage> impl_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace cogsr::numerics
