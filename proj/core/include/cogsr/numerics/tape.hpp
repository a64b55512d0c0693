#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "cogsr/numerics/tensor.hpp"

namespace cogsr::numerics {

enum class Recording { on, off };

// Reverse-mode tape plus the closed set of differentiable operations.
//
// Every op computes its value eagerly. When recording is on and any input
// requires a gradient, the op appends its backward rule; the append order is a
// valid topological order, so backward() simply walks the list in reverse and
// visits each entry once. Gradients accumulate additively into the inputs'
// buffers. The tape is not thread-safe; use one per worker.
//
// Broadcasting is limited to a single row vector ([n] or [1 x n]) applied to
// every row of a 2-D operand.
template <typename T>
class Tape {
 public:
  explicit Tape(Recording mode = Recording::on) : recording_(mode == Recording::on) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::string_view op_name(std::size_t i) const { return entries_.at(i).name; }

  // Drops every recorded entry. Gradient buffers on tensors are untouched.
  void clear() { entries_.clear(); }

  // Seeds d(loss) = seed and runs every recorded backward rule in reverse.
  // Throws DimensionError when loss is not a single element, and Error when
  // nothing was recorded.
  void backward(const Tensor<T>& loss, T seed = T(1));

  Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
  Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
  Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
  Tensor<T> scale(const Tensor<T>& a, T factor);
  Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
  Tensor<T> transpose(const Tensor<T>& a);
  Tensor<T> reshape(const Tensor<T>& a, Shape shape);
  // 2-D concatenation along axis 0 (rows) or 1 (columns).
  Tensor<T> concat(std::span<const Tensor<T>> parts, std::size_t axis);
  // 2-D slice [begin, end) along axis 0 or 1.
  Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end);
  Tensor<T> softmax(const Tensor<T>& a);
  // Normalizes over the last axis; gain and bias may be undefined handles.
  Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T epsilon);
  Tensor<T> silu(const Tensor<T>& a);
  // Row lookup in a [vocab x width] table.
  Tensor<T> embedding(const Tensor<T>& table, std::span<const int> ids);
  Tensor<T> mean(const Tensor<T>& a);
  Tensor<T> mse(const Tensor<T>& predicted, const Tensor<T>& target);
  // Mean over rows of -log softmax(logits)[row, label[row]].
  Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

  // x * w + b, with b broadcast over rows. b may be undefined.
  Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

 private:
  struct Entry {
    std::string_view name;
    std::function<void()> backward;
  };

  bool track(std::initializer_list<const Tensor<T>*> inputs) const;
  void record(std::string_view name, std::function<void()> fn) { entries_.push_back({name, std::move(fn)}); }

  bool recording_;
  std::vector<Entry> entries_;
};

#ifndef COGSR_TAPE_INSTANTIATION
extern template class Tape<float>;
extern template class Tape<double>;
#endif

// Names of every differentiable operation the tape implements.
std::span<const std::string_view> registered_ops();

}  // namespace cogsr::numerics
