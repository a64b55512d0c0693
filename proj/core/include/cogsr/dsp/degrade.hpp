#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "cogsr/dsp/noise.hpp"
#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct DegradationSpec {
  double cutoff_hz = 8000.0;  // at Nyquist the lowpass stage is skipped
  double snr_db = kNoNoise;
  NoiseKind noise_kind = NoiseKind::pink;
  std::uint64_t rng_seed = 0;
};

void validate(const DegradationSpec& d, int sample_rate);

struct Degraded {
  Waveform audio;
  DegradationSpec applied;
  std::size_t clipped = 0;  // samples clamped to [-1, 1] after mixing
};

// Lowpass first, then additive noise, then clipping to [-1, 1].
Degraded degrade(const Waveform& w, const DegradationSpec& d);

}  // namespace cogsr::dsp
