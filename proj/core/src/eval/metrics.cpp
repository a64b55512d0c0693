#include "cogsr/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "cogsr/error.hpp"

namespace cogsr::eval {

double lsd(const dsp::Spectrogram& ref, const dsp::Spectrogram& gen, const LsdConfig& cfg, std::size_t first_bin) {
  if (ref.bins != gen.bins) {
    throw DimensionError("LSD needs equal bin counts, got " + std::to_string(ref.bins) + " and " +
                         std::to_string(gen.bins));
  }
  if (first_bin >= ref.bins) throw ValidationError("LSD band is empty");
  const std::size_t frames = std::min(ref.frames, gen.frames);
  const std::size_t gap = std::max(ref.frames, gen.frames) - frames;
  if (gap > cfg.max_frame_mismatch) {
    throw DimensionError("LSD inputs differ by " + std::to_string(gap) + " frames");
  }
  if (frames == 0) throw DimensionError("LSD needs at least one frame");
  if (gap > 0) spdlog::warn("lsd: truncating to {} common frames ({} dropped)", frames, gap);
  const double eps = cfg.epsilon;
  const double width = static_cast<double>(ref.bins - first_bin);
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    double acc = 0.0;
    for (std::size_t f = first_bin; f < ref.bins; ++f) {
      const double s = std::max(ref.at(t, f), eps);
      const double g = std::max(gen.at(t, f), eps);
      const double d = std::log10((s * s) / (g * g));
      acc += d * d;
    }
    total += std::sqrt(acc / width);
  }
  return total / static_cast<double>(frames);
}

double lsd(const dsp::Waveform& ref, const dsp::Waveform& gen, const LsdConfig& cfg) {
  return lsd(dsp::stft_magnitude(ref, cfg.fft_len, cfg.hop), dsp::stft_magnitude(gen, cfg.fft_len, cfg.hop), cfg);
}

double lsd_highband(const dsp::Waveform& ref, const dsp::Waveform& gen, double cutoff_hz, const LsdConfig& cfg) {
  const auto s = dsp::stft_magnitude(ref, cfg.fft_len, cfg.hop);
  std::size_t first = 0;
  while (first < s.bins && s.bin_hz(first) <= cutoff_hz) ++first;
  return lsd(s, dsp::stft_magnitude(gen, cfg.fft_len, cfg.hop), cfg, first);
}

namespace {

template <typename W>
std::size_t levenshtein(std::span<const W> a, std::span<const W> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename W>
double word_error_rate(std::span<const W> ref, std::span<const W> hyp) {
  if (ref.empty()) throw ValidationError("WER needs a non-empty reference");
  return static_cast<double>(levenshtein(ref, hyp)) / static_cast<double>(ref.size());
}

}  // namespace

std::size_t edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp) {
  return levenshtein(ref, hyp);
}
std::size_t edit_distance(std::span<const int> ref, std::span<const int> hyp) { return levenshtein(ref, hyp); }

double wer(std::span<const std::string> ref, std::span<const std::string> hyp) { return word_error_rate(ref, hyp); }
double wer(std::span<const int> ref, std::span<const int> hyp) { return word_error_rate(ref, hyp); }

double speaker_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("speaker_sim needs equal dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("speaker_sim is undefined for a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace cogsr::eval
