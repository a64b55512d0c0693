#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cogsr/numerics/tensor.hpp"

namespace cogsr::numerics {

enum class Init {
  zeros,
  ones,
  fan_in_uniform,  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)), fan_in = shape[0]
  normal_small,    // N(0, 0.02^2), used for embedding tables
};

// Ordered, named collection of trainable tensors. Insertion order is the
// canonical order for optimizers and checkpoints.
template <typename T>
class ParameterSet {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  Tensor<T> create(const std::string& name, Shape shape, Init init, std::mt19937_64& rng);
  void insert(const std::string& name, Tensor<T> tensor);

  Tensor<T> get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace cogsr::numerics
