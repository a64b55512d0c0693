#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

// Sine-window MDCT with hop = frame_len and window length 2 * frame_len.
// Basis functions are scaled by sqrt(2 / frame_len), which makes the lapped
// transform orthonormal: analysis and synthesis use the same kernel.
class Mdct {
 public:
  explicit Mdct(std::size_t frame_len);

  std::size_t frame_len() const noexcept { return n_; }
  const std::vector<double>& window() const noexcept { return window_; }

  // block: 2N samples; out: N coefficients.
  void forward(std::span<const double> block, std::span<double> out) const;
  // Adds the windowed 2N-sample synthesis of coeffs into out.
  void inverse_add(std::span<const double> coeffs, std::span<double> out) const;

 private:
  std::size_t n_;
  std::vector<double> window_;
  std::vector<double> kernel_;  // N x 2N, window folded in
};

// frames x dim coefficient matrix. Frame f analyses samples
// [(f - 1) * dim, (f + 1) * dim) of the source, zero outside it, so a signal
// of L samples yields ceil(L / dim) + 1 frames.
struct LatentSequence {
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  int sample_rate = 16000;
  std::size_t source_samples = 0;
  std::string stats_id;  // empty while unnormalized

  double& at(std::size_t f, std::size_t k) { return values[f * dim + k]; }
  double at(std::size_t f, std::size_t k) const { return values[f * dim + k]; }
};

std::size_t mdct_frame_count(std::size_t samples, std::size_t frame_len);

// Throws ValidationError for odd or zero frame_len.
LatentSequence mdct_encode(const Waveform& w, std::size_t frame_len);
// Output has source_samples samples when set, else (frames - 1) * dim.
// Throws when values are normalized (stats_id non-empty).
Waveform mdct_decode(const LatentSequence& l);

// Per-dimension z-score statistics.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::string id;  // content hash of mean and std

  static NormalizationStats compute(const std::vector<LatentSequence>& corpus);
  static NormalizationStats from_moments(std::vector<double> mean, std::vector<double> std);

  void normalize(LatentSequence& l) const;
  void denormalize(LatentSequence& l) const;
};

}  // namespace cogsr::dsp
