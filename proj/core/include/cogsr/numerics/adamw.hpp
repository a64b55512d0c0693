#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cogsr/numerics/parameters.hpp"

namespace cogsr::numerics {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// First/second moments for one parameter tensor.
template <typename T>
struct AdamWSlot {
  std::vector<T> m;
  std::vector<T> v;
};

template <typename T>
struct AdamWState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<AdamWSlot<T>> slots;
};

// Decoupled-weight-decay Adam update on flat buffers. `step` is the 1-based
// index of this update and drives bias correction:
//   p <- p - lr * wd * p
//   m <- b1 m + (1 - b1) g,   v <- b2 v + (1 - b2) g^2
//   p <- p - lr * (m / (1 - b1^step)) / (sqrt(v / (1 - b2^step)) + eps)
template <typename T>
void adamw_update(std::span<T> param, std::span<const T> grad, AdamWSlot<T>& slot, const AdamWConfig& config,
                  std::uint64_t step, double lr_scale = 1.0);

template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) { state_.config = config; }

  // Applies one update to every parameter using its accumulated gradient.
  // Moments are allocated on the first call.
  void step(ParameterSet<T>& params, double lr_scale = 1.0);

  AdamWState<T>& state() { return state_; }
  const AdamWState<T>& state() const { return state_; }

 private:
  AdamWState<T> state_;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace cogsr::numerics
