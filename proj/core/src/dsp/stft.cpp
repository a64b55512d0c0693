#include "cogsr/dsp/stft.hpp"

#include <cmath>
#include <numbers>

#include "cogsr/dsp/fft.hpp"
#include "cogsr/error.hpp"

namespace cogsr::dsp {

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::hann) {
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n));
  }
  return w;
}

Spectrogram stft_magnitude(const Waveform& w, std::size_t fft_len, std::size_t hop, WindowKind window) {
  if (!is_power_of_two(fft_len)) throw ValidationError("fft_len must be a power of two, got " + std::to_string(fft_len));
  if (hop == 0 || hop > fft_len) throw ValidationError("hop must be in [1, fft_len], got " + std::to_string(hop));
  if (w.size() < fft_len) {
    throw ValidationError("signal of " + std::to_string(w.size()) + " samples is shorter than one " +
                          std::to_string(fft_len) + "-sample frame");
  }
  Spectrogram s;
  s.fft_len = fft_len;
  s.hop = hop;
  s.sample_rate = w.sample_rate;
  s.bins = fft_len / 2 + 1;
  s.frames = (w.size() - fft_len) / hop + 1;
  s.magnitude.resize(s.frames * s.bins);
  const auto win = make_window(window, fft_len);
  std::vector<double> frame(fft_len);
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (std::size_t i = 0; i < fft_len; ++i) frame[i] = w.samples[t * hop + i] * win[i];
    const auto spec = rfft(frame);
    for (std::size_t f = 0; f < s.bins; ++f) s.magnitude[t * s.bins + f] = std::abs(spec[f]);
  }
  return s;
}

}  // namespace cogsr::dsp
