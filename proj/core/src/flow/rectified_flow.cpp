#include "cogsr/flow/rectified_flow.hpp"

namespace cogsr::flow {

FlowSample make_flow_sample(std::vector<double> x1, std::vector<double> x0, double t) {
  if (x1.size() != x0.size()) throw DimensionError("x0 and x1 sizes differ");
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("t must lie in [0, 1]");
  FlowSample s;
  s.t = t;
  s.xt.resize(x1.size());
  s.target.resize(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    s.xt[i] = t * x1[i] + (1.0 - t) * x0[i];
    s.target[i] = x1[i] - x0[i];
  }
  s.x0 = std::move(x0);
  s.x1 = std::move(x1);
  return s;
}

FlowSample make_flow_sample(std::vector<double> x1, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x0(x1.size());
  for (double& v : x0) v = gauss(rng);
  const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return make_flow_sample(std::move(x1), std::move(x0), t);
}

double rf_loss(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size() || predicted.empty()) {
    throw DimensionError("rf_loss: sizes " + std::to_string(predicted.size()) + " and " +
                         std::to_string(target.size()) + " differ or are empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted.size());
}

}  // namespace cogsr::flow
