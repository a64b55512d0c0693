#include "cogsr/numerics/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "cogsr/error.hpp"

namespace cogsr::numerics {

template <typename T>
Tensor<T> ParameterSet<T>::create(const std::string& name, Shape shape, Init init, std::mt19937_64& rng) {
  Tensor<T> t = Tensor<T>::zeros(shape, true);
  switch (init) {
    case Init::zeros:
      break;
    case Init::ones:
      std::fill(t.values().begin(), t.values().end(), T(1));
      break;
    case Init::fan_in_uniform: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape.front()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (T& v : t.values()) v = static_cast<T>(dist(rng));
      break;
    }
    case Init::normal_small: {
      std::normal_distribution<double> dist(0.0, 0.02);
      for (T& v : t.values()) v = static_cast<T>(dist(rng));
      break;
    }
  }
  insert(name, t);
  return t;
}

template <typename T>
void ParameterSet<T>::insert(const std::string& name, Tensor<T> tensor) {
  if (contains(name)) throw ValidationError("duplicate parameter name: " + name);
  tensor.set_requires_grad(true);
  entries_.emplace_back(name, std::move(tensor));
}

template <typename T>
Tensor<T> ParameterSet<T>::get(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ValidationError("unknown parameter: " + name);
}

template <typename T>
bool ParameterSet<T>::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == name; });
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace cogsr::numerics
