#include "cogsr/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cogsr::numerics {

template <typename T>
GradCheckReport grad_check(const ScalarFunction<T>& f, std::vector<std::pair<std::string, Tensor<T>>> inputs,
                           const GradCheckOptions& options) {
  GradCheckReport report;

  for (auto& [name, t] : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  {
    Tape<T> tape;
    Tensor<T> loss = f(tape);
    tape.backward(loss);
  }
  std::vector<std::vector<T>> analytic;
  analytic.reserve(inputs.size());
  for (auto& [name, t] : inputs) {
    auto g = std::as_const(t).grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  // (tensor index, element index) of every coordinate, then subsample.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].second.size(); ++i) coords.emplace_back(k, i);
  }
  if (coords.size() > options.max_coordinates) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
  }

  auto evaluate = [&]() {
    Tape<T> tape(Recording::off);
    return static_cast<double>(f(tape).item());
  };

  const T h = static_cast<T>(options.step);
  for (auto [k, i] : coords) {
    Tensor<T>& t = inputs[k].second;
    const T original = t[i];
    t[i] = original + h;
    const double plus = evaluate();
    t[i] = original - h;
    const double minus = evaluate();
    t[i] = original;
    const double numeric = (plus - minus) / (2.0 * static_cast<double>(h));
    const double a = analytic[k][i];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
    const double rel = std::abs(a - numeric) / denom;
    ++report.coordinates_checked;
    if (rel > report.max_relative_error || report.coordinates_checked == 1) {
      report.max_relative_error = std::max(report.max_relative_error, rel);
      report.worst_tensor = inputs[k].first;
      report.worst_index = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

template GradCheckReport grad_check<float>(const ScalarFunction<float>&,
                                           std::vector<std::pair<std::string, Tensor<float>>>,
                                           const GradCheckOptions&);
template GradCheckReport grad_check<double>(const ScalarFunction<double>&,
                                            std::vector<std::pair<std::string, Tensor<double>>>,
                                            const GradCheckOptions&);

}  // namespace cogsr::numerics
