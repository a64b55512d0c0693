#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "cogsr/error.hpp"

namespace cogsr::flow {

// One point on the straight path between noise x0 and data x1.
struct FlowSample {
  std::vector<double> x0;
  std::vector<double> x1;
  double t = 0.0;
  std::vector<double> xt;      // t * x1 + (1 - t) * x0
  std::vector<double> target;  // x1 - x0
};

FlowSample make_flow_sample(std::vector<double> x1, std::vector<double> x0, double t);
// x0 ~ N(0, I), t ~ U(0, 1), both drawn from rng in that order.
FlowSample make_flow_sample(std::vector<double> x1, std::mt19937_64& rng);

// Mean squared difference over all entries. Throws DimensionError on size mismatch.
double rf_loss(std::span<const double> predicted, std::span<const double> target);

// Explicit Euler: x <- x + (1/steps) v(x, i/steps) for i = 0..steps-1.
// velocity(const std::vector<double>& x, double t) returns a vector of x's size.
template <typename Velocity>
std::vector<double> euler_integrate(std::vector<double> x, std::size_t steps, Velocity&& velocity) {
  if (steps == 0) throw ValidationError("euler sampling needs at least one step");
  const double dt = 1.0 / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    const std::vector<double> v = velocity(static_cast<const std::vector<double>&>(x), t);
    if (v.size() != x.size()) throw DimensionError("velocity field returned the wrong size");
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += dt * v[j];
  }
  return x;
}

}  // namespace cogsr::flow
