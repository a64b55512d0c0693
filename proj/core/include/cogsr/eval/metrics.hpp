#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cogsr/dsp/stft.hpp"
#include "cogsr/dsp/waveform.hpp"

namespace cogsr::eval {

inline constexpr double kLsdEpsilon = 1e-8;

struct LsdConfig {
  std::size_t fft_len = 512;
  std::size_t hop = 128;
  double epsilon = kLsdEpsilon;
  std::size_t max_frame_mismatch = 2;  // truncated to the shorter input up to this many frames
};

// Log-spectral distance over bins [first_bin, bins):
//   (1/T) sum_t sqrt((1/F) sum_f (log10(S^2 / G^2))^2)
// with magnitudes floored at epsilon. Throws DimensionError when bin counts
// differ or frame counts differ by more than max_frame_mismatch.
double lsd(const dsp::Spectrogram& ref, const dsp::Spectrogram& gen, const LsdConfig& cfg = {},
           std::size_t first_bin = 0);

// Waveform helpers; the high-band variant keeps bins strictly above cutoff_hz.
double lsd(const dsp::Waveform& ref, const dsp::Waveform& gen, const LsdConfig& cfg = {});
double lsd_highband(const dsp::Waveform& ref, const dsp::Waveform& gen, double cutoff_hz, const LsdConfig& cfg = {});

// Unit-cost Levenshtein distance.
std::size_t edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp);
std::size_t edit_distance(std::span<const int> ref, std::span<const int> hyp);

// edit_distance / |ref|. Throws ValidationError for an empty reference.
double wer(std::span<const std::string> ref, std::span<const std::string> hyp);
double wer(std::span<const int> ref, std::span<const int> hyp);

// Cosine similarity clamped to [-1, 1]. Throws on size mismatch or a zero vector.
double speaker_sim(std::span<const double> a, std::span<const double> b);

}  // namespace cogsr::eval
