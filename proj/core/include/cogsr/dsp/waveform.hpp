#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace cogsr::dsp {

// Mono audio at a fixed integer sample rate. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
  double nyquist() const noexcept { return 0.5 * sample_rate; }
};

// Mean of squared samples; 0 for an empty signal.
double mean_power(const std::vector<double>& x);
double peak_abs(const std::vector<double>& x);

// Clamps samples to [-1, 1] in place and returns how many were clipped.
std::size_t clip_in_place(Waveform& w);

// 16-bit PCM mono RIFF/WAVE. Writing clamps to [-1, 1] and rounds to the
// nearest integer code (scale 32767). Reading accepts 16-bit PCM mono only.
void write_wav(const std::filesystem::path& path, const Waveform& w);
Waveform read_wav(const std::filesystem::path& path);

}  // namespace cogsr::dsp
