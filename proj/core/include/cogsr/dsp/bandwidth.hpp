#pragma once

#include <cstddef>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

struct BandwidthEstimatorConfig {
  double grid_hz = 250.0;
  double drop_db = 40.0;
  std::size_t fft_len = 512;
  std::size_t hop = 256;
};

// Lowest grid frequency f whose mean power above f (skipping a half-step guard
// for the filter transition) sits drop_db below the mean power in (0, f).
// Returns Nyquist when no such f exists. Throws for silent input or input
// shorter than fft_len.
double estimate_bandwidth(const Waveform& w, const BandwidthEstimatorConfig& config = {});

}  // namespace cogsr::dsp
