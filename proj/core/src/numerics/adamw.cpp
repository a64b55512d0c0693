#include "cogsr/numerics/adamw.hpp"

#include <cmath>

#include "cogsr/error.hpp"

namespace cogsr::numerics {

template <typename T>
void adamw_update(std::span<T> param, std::span<const T> grad, AdamWSlot<T>& slot, const AdamWConfig& config,
                  std::uint64_t step, double lr_scale) {
  if (grad.size() != param.size() || slot.m.size() != param.size() || slot.v.size() != param.size()) {
    throw DimensionError("adamw: parameter, gradient and moment sizes differ (" + std::to_string(param.size()) +
                         ", " + std::to_string(grad.size()) + ", " + std::to_string(slot.m.size()) + ")");
  }
  if (!(config.lr > 0.0)) throw ValidationError("adamw: learning rate must be positive");
  if (step == 0) throw ValidationError("adamw: step index is 1-based");
  const double lr = config.lr * lr_scale;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
  const double decay = 1.0 - lr * config.weight_decay;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = b1 * slot.m[i] + (1.0 - b1) * g;
    const double v = b2 * slot.v[i] + (1.0 - b2) * g * g;
    slot.m[i] = static_cast<T>(m);
    slot.v[i] = static_cast<T>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param[i] = static_cast<T>(param[i] * decay - lr * m_hat / (std::sqrt(v_hat) + config.epsilon));
  }
}

template <typename T>
void AdamW<T>::step(ParameterSet<T>& params, double lr_scale) {
  auto& entries = params.entries();
  if (state_.slots.empty()) {
    state_.slots.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      state_.slots[i].m.assign(entries[i].second.size(), T(0));
      state_.slots[i].v.assign(entries[i].second.size(), T(0));
    }
  }
  if (state_.slots.size() != entries.size()) {
    throw DimensionError("adamw: optimizer state tracks " + std::to_string(state_.slots.size()) +
                         " tensors but " + std::to_string(entries.size()) + " were given");
  }
  ++state_.step;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor<T>& p = entries[i].second;
    adamw_update<T>(p.data(), std::as_const(p).grad(), state_.slots[i], state_.config, state_.step, lr_scale);
  }
}

template void adamw_update<float>(std::span<float>, std::span<const float>, AdamWSlot<float>&, const AdamWConfig&,
                                  std::uint64_t, double);
template void adamw_update<double>(std::span<double>, std::span<const double>, AdamWSlot<double>&,
                                   const AdamWConfig&, std::uint64_t, double);
template class AdamW<float>;
template class AdamW<double>;

}  // namespace cogsr::numerics
