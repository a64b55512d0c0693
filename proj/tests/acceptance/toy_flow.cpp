#include "toy_flow.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cogsr/flow/rectified_flow.hpp"
#include "cogsr/numerics/adamw.hpp"
#include "cogsr/numerics/parameters.hpp"
#include "cogsr/numerics/tape.hpp"

namespace cogsr::acceptance {

namespace {

using numerics::Tape;
using numerics::Tensor;
using T = float;

std::size_t input_width(const ToyFlowConfig& c) { return 3 + 2 * c.time_freqs; }

// Rows of [x, y, t, sin(2 pi k t), cos(2 pi k t)].
Tensor<T> features(const std::vector<double>& xy, const std::vector<double>& t, const ToyFlowConfig& c) {
  const std::size_t n = t.size(), w = input_width(c);
  std::vector<T> v(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    T* row = v.data() + i * w;
    row[0] = static_cast<T>(xy[2 * i]);
    row[1] = static_cast<T>(xy[2 * i + 1]);
    row[2] = static_cast<T>(t[i]);
    for (std::size_t k = 0; k < c.time_freqs; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k + 1) * t[i];
      row[3 + 2 * k] = static_cast<T>(std::sin(a));
      row[4 + 2 * k] = static_cast<T>(std::cos(a));
    }
  }
  return Tensor<T>::from({n, w}, std::move(v));
}

class VelocityNet {
 public:
  VelocityNet(const ToyFlowConfig& c, std::mt19937_64& rng) : config_(c) {
    std::size_t in = input_width(c);
    for (std::size_t l = 0; l <= c.layers; ++l) {
      const std::size_t out = l == c.layers ? 2 : c.hidden;
      const std::string s = std::to_string(l);
      params_.create("w" + s, {in, out}, numerics::Init::fan_in_uniform, rng);
      params_.create("b" + s, {out}, numerics::Init::zeros, rng);
      in = out;
    }
  }

  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x) const {
    Tensor<T> h = x;
    for (std::size_t l = 0; l <= config_.layers; ++l) {
      const std::string s = std::to_string(l);
      h = tape.linear(h, params_.get("w" + s), params_.get("b" + s));
      if (l < config_.layers) h = tape.silu(h);
    }
    return h;
  }

  numerics::ParameterSet<T>& params() { return params_; }

 private:
  ToyFlowConfig config_;
  numerics::ParameterSet<T> params_;
};

std::vector<double> draw_target(const RingMixture& m, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> mode(0, m.modes - 1);
  std::normal_distribution<double> normal(0.0, m.sigma);
  std::vector<double> xy(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = m.center(mode(rng));
    xy[2 * i] = c[0] + normal(rng);
    xy[2 * i + 1] = c[1] + normal(rng);
  }
  return xy;
}

}  // namespace

std::array<double, 2> RingMixture::center(std::size_t k) const {
  const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modes);
  return {radius * std::cos(a), radius * std::sin(a)};
}

ToyFlowResult run_toy_flow(const RingMixture& target, const ToyFlowConfig& config, std::size_t samples,
                           std::size_t euler_steps) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  VelocityNet net(config, rng);
  for (auto& [name, p] : net.params().entries()) p.set_requires_grad(true);
  numerics::AdamWConfig adam_config;
  adam_config.lr = config.lr;
  numerics::AdamW<T> adam(adam_config);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  ToyFlowResult result;
  double recent = 0.0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto x1 = draw_target(target, config.batch, rng);
    std::vector<double> xt(2 * config.batch), t(config.batch);
    std::vector<T> v(2 * config.batch);
    for (std::size_t i = 0; i < config.batch; ++i) {
      std::vector<double> x0{normal(rng), normal(rng)};
      const auto s = flow::make_flow_sample({x1[2 * i], x1[2 * i + 1]}, std::move(x0), uniform(rng));
      t[i] = s.t;
      for (std::size_t d = 0; d < 2; ++d) {
        xt[2 * i + d] = s.xt[d];
        v[2 * i + d] = static_cast<T>(s.target[d]);
      }
    }
    net.params().zero_grad();
    Tape<T> tape;
    const auto pred = net.forward(tape, features(xt, t, config));
    const auto loss = tape.mse(pred, Tensor<T>::from({config.batch, 2}, std::move(v)));
    tape.backward(loss);
    const double progress = static_cast<double>(step) / static_cast<double>(config.steps);
    adam.step(net.params(), 0.05 + 0.95 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
    recent = step == 0 ? loss.item() : 0.98 * recent + 0.02 * loss.item();
  }
  result.final_loss = recent;

  // Sampling: every point integrated in one batch per Euler step.
  std::vector<double> x(2 * samples);
  for (auto& e : x) e = normal(rng);
  x = flow::euler_integrate(std::move(x), euler_steps, [&](const std::vector<double>& state, double time) {
    Tape<T> tape(numerics::Recording::off);
    const auto out = net.forward(tape, features(state, std::vector<double>(samples, time), config));
    return std::vector<double>(out.data().begin(), out.data().end());
  });
  result.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (std::size_t k = 0; k < target.modes; ++k) {
    const auto c = target.center(k);
    std::size_t hits = 0;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double dx = x[2 * i] - c[0], dy = x[2 * i + 1] - c[1];
      if (std::hypot(dx, dy) <= 3.0 * target.sigma) {
        ++hits;
        sx += x[2 * i];
        sy += x[2 * i + 1];
      }
    }
    ModeReport m;
    m.fraction = static_cast<double>(hits) / static_cast<double>(samples);
    if (hits) m.mean_error = {std::abs(sx / static_cast<double>(hits) - c[0]), std::abs(sy / static_cast<double>(hits) - c[1])};
    else m.mean_error = {INFINITY, INFINITY};
    result.modes.push_back(m);
  }
  return result;
}

}  // namespace cogsr::acceptance
