#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cogsr/numerics/tape.hpp"

namespace cogsr::numerics {

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t max_coordinates = 100;  // sampled without replacement when exceeded
  std::uint64_t seed = 0;
  // Relative error uses max(|analytic|, |numeric|, floor) as denominator so
  // coordinates with vanishing gradients do not divide by ~0.
  double denominator_floor = 1e-6;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool within(double tolerance) const { return max_relative_error <= tolerance; }
};

template <typename T>
using ScalarFunction = std::function<Tensor<T>(Tape<T>&)>;

// Compares tape gradients of `f` against central differences at the current
// values of `inputs`. `f` must rebuild its graph from the inputs on every call.
// Always returns a report; inputs are restored to their original values.
template <typename T>
GradCheckReport grad_check(const ScalarFunction<T>& f, std::vector<std::pair<std::string, Tensor<T>>> inputs,
                           const GradCheckOptions& options = {});

extern template GradCheckReport grad_check<float>(const ScalarFunction<float>&,
                                                  std::vector<std::pair<std::string, Tensor<float>>>,
                                                  const GradCheckOptions&);
extern template GradCheckReport grad_check<double>(const ScalarFunction<double>&,
                                                   std::vector<std::pair<std::string, Tensor<double>>>,
                                                   const GradCheckOptions&);

}  // namespace cogsr::numerics
