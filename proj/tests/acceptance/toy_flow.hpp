#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cogsr::acceptance {

// Eight isotropic Gaussians evenly spaced on a circle.
struct RingMixture {
  double radius = 4.0;
  double sigma = 0.25;
  std::size_t modes = 8;

  std::array<double, 2> center(std::size_t k) const;
};

struct ToyFlowConfig {
  std::size_t hidden = 128;
  std::size_t layers = 3;
  std::size_t time_freqs = 4;
  std::size_t steps = 3000;
  std::size_t batch = 256;
  double lr = 2e-3;
  std::uint64_t seed = 5;
};

struct ModeReport {
  double fraction = 0.0;  // share of samples within 3 sigma of the center
  std::array<double, 2> mean_error{};
};

struct ToyFlowResult {
  std::vector<ModeReport> modes;
  double final_loss = 0.0;
  double train_seconds = 0.0;
};

// Trains an MLP velocity field on the mixture from scratch, draws `samples`
// points with a `euler_steps` Euler integration and scores every mode.
ToyFlowResult run_toy_flow(const RingMixture& target, const ToyFlowConfig& config, std::size_t samples,
                           std::size_t euler_steps);

}  // namespace cogsr::acceptance
