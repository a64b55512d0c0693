#include "cogsr/eval/speaker.hpp"

#include <algorithm>
#include <cmath>

#include "cogsr/dsp/pitch.hpp"
#include "cogsr/dsp/stft.hpp"
#include "cogsr/error.hpp"

namespace cogsr::eval {

namespace {

constexpr std::size_t kFft = 512;
constexpr std::size_t kHop = 128;
constexpr double kActiveRangeDb = 40.0;
constexpr double kPowerFloor = 1e-12;


}  // namespace

SpeakerEmbeddingStats SpeakerEmbeddingStats::compute(std::span<const std::vector<double>> raw) {
  if (raw.empty()) throw ValidationError("speaker stats need at least one embedding");
  const std::size_t d = raw.front().size();
  SpeakerEmbeddingStats s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (const auto& e : raw) {
    if (e.size() != d) throw DimensionError("speaker embeddings differ in size");
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += e[i];
  }
  for (auto& m : s.mean) m /= static_cast<double>(raw.size());
  for (const auto& e : raw) {
    for (std::size_t i = 0; i < d; ++i) s.std[i] += (e[i] - s.mean[i]) * (e[i] - s.mean[i]);
  }
  for (auto& v : s.std) v = std::max(std::sqrt(v / static_cast<double>(raw.size())), 1e-6);
  return s;
}

std::vector<double> raw_speaker_features(const dsp::Waveform& w) {
  if (w.duration_s() < kMinSpeakerSeconds) {
    throw ValidationError("speaker embedding needs at least 0.5 s of audio, got " + std::to_string(w.duration_s()));
  }
  std::vector<double> out;
  out.reserve(kSpeakerEmbeddingDim);
  const auto p = dsp::pitch_stats(dsp::track_pitch(w));
  out.push_back(std::log(std::max(p.median_f0_hz, 1.0)));
  out.push_back(p.log_f0_std);
  out.push_back(p.voiced_fraction);

  const auto spec = dsp::stft_magnitude(w, kFft, kHop);
  std::vector<std::size_t> edges(kSpeakerBands + 1);
  const double step = (kEnvelopeHighHz - kEnvelopeLowHz) / static_cast<double>(kSpeakerBands);
  for (std::size_t b = 0; b <= kSpeakerBands; ++b) {
    const double hz = kEnvelopeLowHz + step * static_cast<double>(b);
    edges[b] = std::min(spec.bins - 1, static_cast<std::size_t>(std::lround(hz * kFft / w.sample_rate)));
  }

  std::vector<double> frame_power(spec.frames, 0.0);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) frame_power[t] += spec.at(t, f) * spec.at(t, f);
  }
  const double loudest = spec.frames ? *std::max_element(frame_power.begin(), frame_power.end()) : 0.0;
  const double gate = loudest * std::pow(10.0, -kActiveRangeDb / 10.0);
  std::vector<double> bands(kSpeakerBands, 0.0);
  std::size_t active = 0;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    if (frame_power[t] <= 0.0 || frame_power[t] < gate) continue;
    ++active;
    for (std::size_t b = 0; b < kSpeakerBands; ++b) {
      double acc = 0.0;
      for (std::size_t f = edges[b]; f < edges[b + 1]; ++f) acc += spec.at(t, f) * spec.at(t, f);
      bands[b] += std::log10(acc / static_cast<double>(edges[b + 1] - edges[b]) + kPowerFloor);
    }
  }
  if (active == 0) throw ValidationError("speaker embedding needs non-silent audio");
  double level = 0.0;
  for (double& v : bands) {
    v /= static_cast<double>(active);
    level += v / static_cast<double>(kSpeakerBands);
  }
  for (double v : bands) out.push_back(v - level);
  return out;
}

std::vector<double> proxy_speaker_embedding(const dsp::Waveform& w, const SpeakerEmbeddingStats& stats) {
  auto e = raw_speaker_features(w);
  if (stats.empty()) return e;
  if (stats.mean.size() != e.size() || stats.std.size() != e.size()) {
    throw DimensionError("speaker stats have the wrong dimension");
  }
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = (e[i] - stats.mean[i]) / stats.std[i];
  return e;
}

}  // namespace cogsr::eval
