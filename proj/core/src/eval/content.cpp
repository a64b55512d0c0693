#include "cogsr/eval/content.hpp"

#include <algorithm>
#include <cmath>

#include "cogsr/dsp/fft.hpp"
#include "cogsr/dsp/stft.hpp"
#include "cogsr/error.hpp"
#include "cogsr/eval/metrics.hpp"

namespace cogsr::eval {

namespace {

// Burst region inside a slot, kept clear of the onset and release ramps.
constexpr double kCoreBegin = 0.3;
constexpr double kCoreEnd = 0.7;
// Band power relative to the slot's mean bin power; anything this far down
// reads as absent, so filter leakage cannot reveal a pattern.
constexpr double kFloorLog10 = -5.0;

double correlation(const ContentFeature& a, const ContentFeature& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += (a[i] - ma) * (b[i] - mb);
    aa += (a[i] - ma) * (a[i] - ma);
    bb += (b[i] - mb) * (b[i] - mb);
  }
  if (aa <= 1e-12 || bb <= 1e-12) return 0.0;
  return ab / std::sqrt(aa * bb);
}

}  // namespace

ContentFeature slot_feature(const dsp::Waveform& w, double slot_start_s, double slot_end_s) {
  if (!(slot_end_s > slot_start_s)) throw ValidationError("slot must have positive length");
  const double len = slot_end_s - slot_start_s;
  const auto sr = static_cast<double>(w.sample_rate);
  const auto begin = static_cast<std::size_t>(std::max(0.0, std::round((slot_start_s + kCoreBegin * len) * sr)));
  const auto end = std::min(w.size(), static_cast<std::size_t>(std::round((slot_start_s + kCoreEnd * len) * sr)));
  if (end <= begin + 1) throw ValidationError("slot lies outside the waveform");
  const std::size_t n = end - begin;
  const std::size_t fft = dsp::next_power_of_two(n);
  const auto window = dsp::make_window(dsp::WindowKind::hann, n);
  std::vector<double> frame(fft, 0.0);
  for (std::size_t i = 0; i < n; ++i) frame[i] = w.samples[begin + i] * window[i];
  const auto spec = dsp::rfft(frame);
  ContentFeature f{};
  std::array<std::size_t, dsp::kTokenBands> counts{};
  double total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double p = std::norm(spec[k]);
    total += p;
    const double hz = static_cast<double>(k) * sr / static_cast<double>(fft);
    const double rel = (hz - dsp::kTokenBandLowHz) / dsp::kTokenBandWidthHz;
    if (rel < 0.0) continue;
    const auto band = static_cast<std::size_t>(rel);
    if (band >= dsp::kTokenBands) continue;
    f[band] += p;
    ++counts[band];
  }
  const double mean_bin = total / static_cast<double>(spec.size());
  for (std::size_t b = 0; b < f.size(); ++b) {
    const double band = counts[b] ? f[b] / static_cast<double>(counts[b]) : 0.0;
    const double rel = mean_bin > 0.0 ? band / mean_bin : 0.0;
    f[b] = rel > 0.0 ? std::max(std::log10(rel), kFloorLog10) : kFloorLog10;
  }
  return f;
}

TemplateBank TemplateBank::build(int num_tokens, int sample_rate, std::uint64_t seed) {
  if (num_tokens < 1 || num_tokens > dsp::kMaxTokens) throw ValidationError("template bank token count out of range");
  TemplateBank bank;
  for (int t = 0; t < num_tokens; ++t) {
    dsp::SyntheticUtteranceSpec spec;
    spec.f0_hz = 150.0;
    spec.content_tokens = {t, t, t};
    spec.duration_s = 1.2;
    spec.rng_seed = seed * 1000 + static_cast<std::uint64_t>(t);
    const auto u = dsp::synth_utterance(spec, sample_rate);
    ContentFeature mean{};
    for (const auto& [s, e] : u.labels.slots) {
      const auto f = slot_feature(u.audio, s, e);
      for (std::size_t b = 0; b < f.size(); ++b) mean[b] += f[b] / static_cast<double>(u.labels.slots.size());
    }
    bank.templates_.push_back(mean);
  }
  return bank;
}

int TemplateBank::classify(const ContentFeature& f) const {
  int best = 0;
  double best_r = -2.0;
  for (std::size_t t = 0; t < templates_.size(); ++t) {
    const double r = correlation(f, templates_[t]);
    if (r > best_r) {
      best_r = r;
      best = static_cast<int>(t);
    }
  }
  return best;
}

std::vector<int> classify_tokens(const dsp::Waveform& w, const dsp::UtteranceLabels& labels, const TemplateBank& bank) {
  std::vector<int> out;
  out.reserve(labels.slots.size());
  for (const auto& [s, e] : labels.slots) out.push_back(bank.classify(slot_feature(w, s, e)));
  return out;
}

double content_error_rate(const dsp::Waveform& w, const dsp::UtteranceLabels& labels, const TemplateBank& bank) {
  if (labels.slots.size() != labels.tokens.size()) throw DimensionError("labels need one slot per token");
  const auto hyp = classify_tokens(w, labels, bank);
  return wer(std::span<const int>(labels.tokens), std::span<const int>(hyp));
}

double slot_error_rate(std::span<const int> ref, std::span<const int> hyp) {
  if (ref.empty()) throw ValidationError("slot error rate needs a non-empty reference");
  if (ref.size() != hyp.size()) throw DimensionError("slot error rate needs one hypothesis per slot");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) wrong += ref[i] != hyp[i];
  return static_cast<double>(wrong) / static_cast<double>(ref.size());
}

}  // namespace cogsr::eval
