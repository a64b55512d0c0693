#pragma once

#include <cstddef>
#include <vector>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

enum class WindowKind { hann, rectangular };

// Periodic window of length n.
std::vector<double> make_window(WindowKind kind, std::size_t n);

// T x F magnitude matrix, F = fft_len / 2 + 1.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t fft_len = 0;
  std::size_t hop = 0;
  int sample_rate = 16000;
  std::vector<double> magnitude;

  double at(std::size_t t, std::size_t f) const { return magnitude[t * bins + f]; }
  double bin_hz(std::size_t f) const { return static_cast<double>(f) * sample_rate / static_cast<double>(fft_len); }
};

// Frames start at 0, hop, 2*hop... and must fit inside the signal (no padding).
Spectrogram stft_magnitude(const Waveform& w, std::size_t fft_len, std::size_t hop,
                           WindowKind window = WindowKind::hann);

}  // namespace cogsr::dsp
