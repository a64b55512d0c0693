#pragma once

#include <cstdint>
#include <vector>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

struct PitchTrackerConfig {
  double min_hz = 60.0;
  double max_hz = 500.0;
  double frame_s = 0.04;
  double hop_s = 0.01;
  double voicing_threshold = 0.5;
  // Peaks within this much of the best correlation count as equal; the one
  // with the shortest lag wins, which keeps sub-octave lags from taking over.
  double peak_tolerance = 0.05;
};

struct PitchTrack {
  std::vector<double> f0_hz;       // 0 when unvoiced
  std::vector<std::uint8_t> voiced;
  double hop_s = 0.01;

  std::size_t size() const noexcept { return f0_hz.size(); }
};

// Normalized autocorrelation per frame. Inputs too short for one frame give an
// empty track. Requires sample_rate >= 8000.
PitchTrack track_pitch(const Waveform& w, const PitchTrackerConfig& config = {});

struct PitchStats {
  double median_f0_hz = 0.0;
  double log_f0_std = 0.0;  // population std of ln f0 over voiced frames
  double voiced_fraction = 0.0;
};

// All-unvoiced (or empty) tracks give the zero sentinel.
PitchStats pitch_stats(const PitchTrack& t);

}  // namespace cogsr::dsp
