#pragma once

#include <cstddef>
#include <vector>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

struct LowpassDesign {
  std::size_t num_taps = 513;  // odd, so the group delay is an integer
  double kaiser_beta = 8.6;    // ~86 dB stopband
};

// Kaiser-windowed sinc taps with unit DC gain; cutoff is the -6 dB point.
std::vector<double> design_lowpass(double cutoff_hz, int sample_rate, const LowpassDesign& design = {});

// Linear-phase FIR with the (num_taps-1)/2 delay removed; samples outside the
// input are treated as zero, so the output has the input's length.
std::vector<double> filter_zero_phase(const std::vector<double>& x, const std::vector<double>& taps);

// Requires 0 < cutoff_hz < Nyquist.
Waveform lowpass(const Waveform& w, double cutoff_hz, const LowpassDesign& design = {});

}  // namespace cogsr::dsp
