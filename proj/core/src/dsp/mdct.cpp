#include "cogsr/dsp/mdct.hpp"

#include <cmath>
#include <numbers>

#include "cogsr/error.hpp"
#include "cogsr/util.hpp"

namespace cogsr::dsp {

Mdct::Mdct(std::size_t frame_len) : n_(frame_len) {
  if (frame_len == 0 || frame_len % 2 != 0) {
    throw ValidationError("MDCT frame length must be even and positive, got " + std::to_string(frame_len));
  }
  const std::size_t two_n = 2 * n_;
  const double nd = static_cast<double>(n_);
  window_.resize(two_n);
  for (std::size_t i = 0; i < two_n; ++i) window_[i] = std::sin(std::numbers::pi * (i + 0.5) / (2.0 * nd));
  kernel_.resize(n_ * two_n);
  const double scale = std::sqrt(2.0 / nd);
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t i = 0; i < two_n; ++i) {
      const double arg = std::numbers::pi / nd * (i + 0.5 + 0.5 * nd) * (k + 0.5);
      kernel_[k * two_n + i] = scale * window_[i] * std::cos(arg);
    }
  }
}

void Mdct::forward(std::span<const double> block, std::span<double> out) const {
  const std::size_t two_n = 2 * n_;
  if (block.size() != two_n || out.size() != n_) throw DimensionError("MDCT block size mismatch");
  for (std::size_t k = 0; k < n_; ++k) {
    const double* row = &kernel_[k * two_n];
    double acc = 0.0;
    for (std::size_t i = 0; i < two_n; ++i) acc += row[i] * block[i];
    out[k] = acc;
  }
}

void Mdct::inverse_add(std::span<const double> coeffs, std::span<double> out) const {
  const std::size_t two_n = 2 * n_;
  if (coeffs.size() != n_ || out.size() != two_n) throw DimensionError("MDCT block size mismatch");
  for (std::size_t k = 0; k < n_; ++k) {
    const double c = coeffs[k];
    if (c == 0.0) continue;
    const double* row = &kernel_[k * two_n];
    for (std::size_t i = 0; i < two_n; ++i) out[i] += c * row[i];
  }
}

std::size_t mdct_frame_count(std::size_t samples, std::size_t frame_len) {
  return (samples + frame_len - 1) / frame_len + 1;
}

LatentSequence mdct_encode(const Waveform& w, std::size_t frame_len) {
  const Mdct mdct(frame_len);
  const std::size_t n = frame_len;
  LatentSequence l;
  l.dim = n;
  l.frames = mdct_frame_count(w.size(), n);
  l.sample_rate = w.sample_rate;
  l.source_samples = w.size();
  l.values.assign(l.frames * n, 0.0);
  // padded[j] = source[j - n]
  std::vector<double> padded((l.frames + 1) * n, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), padded.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t f = 0; f < l.frames; ++f) {
    mdct.forward(std::span<const double>(padded).subspan(f * n, 2 * n), std::span<double>(l.values).subspan(f * n, n));
  }
  return l;
}

Waveform mdct_decode(const LatentSequence& l) {
  if (!l.stats_id.empty()) throw ValidationError("mdct_decode needs denormalized values (stats " + l.stats_id + ")");
  if (l.values.size() != l.frames * l.dim) throw DimensionError("latent value count does not match frames x dim");
  const Mdct mdct(l.dim);
  const std::size_t n = l.dim;
  std::vector<double> padded((l.frames + 1) * n, 0.0);
  for (std::size_t f = 0; f < l.frames; ++f) {
    mdct.inverse_add(std::span<const double>(l.values).subspan(f * n, n), std::span<double>(padded).subspan(f * n, 2 * n));
  }
  const std::size_t len = l.source_samples > 0 ? l.source_samples : (l.frames - 1) * n;
  if (len + n > padded.size()) throw DimensionError("latent too short for its recorded source length");
  Waveform w;
  w.sample_rate = l.sample_rate;
  w.samples.assign(padded.begin() + static_cast<std::ptrdiff_t>(n), padded.begin() + static_cast<std::ptrdiff_t>(n + len));
  return w;
}

NormalizationStats NormalizationStats::from_moments(std::vector<double> mean, std::vector<double> std) {
  if (mean.size() != std.size() || mean.empty()) throw DimensionError("normalization mean/std size mismatch");
  for (double s : std) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("normalization std must be positive and finite");
  }
  NormalizationStats st;
  st.mean = std::move(mean);
  st.std = std::move(std);
  st.id = to_hex(fnv1a64(st.std, fnv1a64(st.mean)));
  return st;
}

NormalizationStats NormalizationStats::compute(const std::vector<LatentSequence>& corpus) {
  if (corpus.empty()) throw ValidationError("cannot compute normalization stats of an empty corpus");
  const std::size_t dim = corpus.front().dim;
  std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
  double count = 0.0;
  for (const auto& l : corpus) {
    if (l.dim != dim) throw DimensionError("latent dims differ within corpus");
    if (!l.stats_id.empty()) throw ValidationError("stats must be computed on unnormalized latents");
    for (std::size_t f = 0; f < l.frames; ++f) {
      for (std::size_t k = 0; k < dim; ++k) sum[k] += l.at(f, k);
    }
    count += static_cast<double>(l.frames);
  }
  std::vector<double> mean(dim), sd(dim);
  for (std::size_t k = 0; k < dim; ++k) mean[k] = sum[k] / count;
  for (const auto& l : corpus) {
    for (std::size_t f = 0; f < l.frames; ++f) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = l.at(f, k) - mean[k];
        sq[k] += d * d;
      }
    }
  }
  for (std::size_t k = 0; k < dim; ++k) sd[k] = std::max(std::sqrt(sq[k] / count), 1e-8);
  return from_moments(std::move(mean), std::move(sd));
}

void NormalizationStats::normalize(LatentSequence& l) const {
  if (!l.stats_id.empty()) throw ValidationError("latent is already normalized (stats " + l.stats_id + ")");
  if (l.dim != mean.size()) throw DimensionError("latent dim does not match normalization stats");
  for (std::size_t f = 0; f < l.frames; ++f) {
    for (std::size_t k = 0; k < l.dim; ++k) l.at(f, k) = (l.at(f, k) - mean[k]) / std[k];
  }
  l.stats_id = id;
}

void NormalizationStats::denormalize(LatentSequence& l) const {
  if (l.stats_id != id) throw ValidationError("latent stats id '" + l.stats_id + "' does not match '" + id + "'");
  for (std::size_t f = 0; f < l.frames; ++f) {
    for (std::size_t k = 0; k < l.dim; ++k) l.at(f, k) = l.at(f, k) * std[k] + mean[k];
  }
  l.stats_id.clear();
}

}  // namespace cogsr::dsp
