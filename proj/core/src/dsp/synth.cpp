#include "cogsr/dsp/synth.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cogsr/dsp/fft.hpp"
#include "cogsr/error.hpp"

namespace cogsr::dsp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLead = 0.04;       // silence-ish margin at both ends
constexpr double kVoiceRms = 0.1;
constexpr double kBurstRms = 0.04;
constexpr double kInactiveBandGain = 0.03;
constexpr double kBlock = 32;        // samples per envelope update

// Weight-4 masks over 8 bits, greedily chosen with pairwise distance >= 4.
const std::vector<unsigned>& codebook() {
  static const std::vector<unsigned> book = [] {
    std::vector<unsigned> out;
    for (unsigned m = 0; m < 256 && out.size() < kMaxTokens; ++m) {
      if (std::popcount(m) != 4) continue;
      bool ok = true;
      for (unsigned c : out) ok = ok && std::popcount(m ^ c) >= 4;
      if (ok) out.push_back(m);
    }
    return out;
  }();
  return book;
}

double envelope_db(double f, const std::vector<Formant>& formants, double f1) {
  double db = 18.0 * std::exp(-0.5 * std::pow((f - f1) / 110.0, 2));
  for (const auto& fm : formants) db += fm.gain_db * std::exp(-0.5 * std::pow((f - fm.center_hz) / fm.width_hz, 2));
  if (f > 3000.0) db -= 18.0 * std::log2(f / 3000.0);
  return db;
}

}  // namespace

std::string token_name(int token) { return "S" + std::to_string(token); }

int token_id(std::string_view name) {
  if (name.size() < 2 || (name[0] != 'S' && name[0] != 's')) return -1;
  int id = -1;
  const auto* end = name.data() + name.size();
  const auto [p, ec] = std::from_chars(name.data() + 1, end, id);
  if (ec != std::errc() || p != end || id < 0 || id >= kMaxTokens) return -1;
  return id;
}

std::array<bool, kTokenBands> token_band_pattern(int token) {
  if (token < 0 || token >= kMaxTokens) throw ValidationError("token id out of range: " + std::to_string(token));
  const unsigned m = codebook()[static_cast<std::size_t>(token)];
  std::array<bool, kTokenBands> out{};
  for (int b = 0; b < kTokenBands; ++b) out[static_cast<std::size_t>(b)] = (m >> b) & 1u;
  return out;
}

double group_first_formant_hz(int group) {
  static constexpr std::array<double, kMaxTokens / 2> f1 = {300, 420, 540, 660, 780, 880, 950};
  if (group < 0 || group >= static_cast<int>(f1.size())) throw ValidationError("token group out of range");
  return f1[static_cast<std::size_t>(group)];
}

void validate(const SyntheticUtteranceSpec& spec) {
  if (!(spec.f0_hz >= 70.0 && spec.f0_hz <= 400.0)) {
    throw ValidationError("f0_hz " + std::to_string(spec.f0_hz) + " outside [70, 400]");
  }
  if (!(spec.duration_s >= 0.5 && spec.duration_s <= 4.0)) {
    throw ValidationError("duration_s " + std::to_string(spec.duration_s) + " outside [0.5, 4.0]");
  }
  if (spec.content_tokens.empty()) throw ValidationError("utterance needs at least one content token");
  for (int t : spec.content_tokens) {
    if (t < 0 || t >= kMaxTokens) throw ValidationError("content token out of range: " + std::to_string(t));
  }
  if (!(spec.vibrato_depth >= 0.0 && spec.vibrato_depth < 0.2) || !(spec.vibrato_rate_hz >= 0.0)) {
    throw ValidationError("vibrato depth must be in [0, 0.2) and rate non-negative");
  }
  for (const auto& f : spec.formants) {
    if (!(f.center_hz > 0.0 && f.width_hz > 0.0) || !std::isfinite(f.gain_db)) {
      throw ValidationError("formant needs positive center and width and a finite gain");
    }
  }
}

SynthesizedUtterance synth_utterance(const SyntheticUtteranceSpec& spec, int sample_rate) {
  validate(spec);
  if (sample_rate < 16000) throw ValidationError("synthesis needs a sample rate of at least 16 kHz");
  const double sr = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * sr));
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  SynthesizedUtterance out;
  out.labels.tokens = spec.content_tokens;
  out.labels.f0_hz = spec.f0_hz;
  const std::size_t count = spec.content_tokens.size();
  const double slot_len = (spec.duration_s - 2.0 * kLead) / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double s = kLead + slot_len * static_cast<double>(k);
    out.labels.slots.emplace_back(s, s + slot_len);
  }
  auto slot_at = [&](double t) {
    const auto k = static_cast<std::ptrdiff_t>(std::floor((t - kLead) / slot_len));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(count) - 1));
  };

  // Harmonic source. Envelope parameters are refreshed every kBlock samples.
  const double vib_phase = u01(rng) * kTwoPi;
  const double drift_phase = u01(rng) * kTwoPi;
  const auto harmonics = static_cast<std::size_t>(std::floor(0.49 * sr / spec.f0_hz));
  std::vector<double> h_phase(harmonics);
  for (double& p : h_phase) p = u01(rng) * kTwoPi;
  std::vector<double> voice(n, 0.0), amps(harmonics, 0.0);
  double phase = 0.0;
  const double fade = 0.02;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double f0 = spec.f0_hz * (1.0 + spec.vibrato_depth * std::sin(kTwoPi * spec.vibrato_rate_hz * t + vib_phase) +
                                    0.005 * std::sin(kTwoPi * 0.7 * t + drift_phase));
    if (i % static_cast<std::size_t>(kBlock) == 0) {
      const std::size_t k = slot_at(t);
      // Cross-fade the token formant over 20 ms around slot boundaries.
      double f1 = group_first_formant_hz(token_group(spec.content_tokens[k]));
      const double into = t - out.labels.slots[k].first;
      if (k > 0 && into < 0.01) {
        const double a = 0.5 + 0.5 * into / 0.01;
        f1 = a * f1 + (1.0 - a) * group_first_formant_hz(token_group(spec.content_tokens[k - 1]));
      }
      const double left = out.labels.slots[k].second - t;
      if (k + 1 < count && left < 0.01) {
        const double a = 0.5 + 0.5 * left / 0.01;
        f1 = a * f1 + (1.0 - a) * group_first_formant_hz(token_group(spec.content_tokens[k + 1]));
      }
      const double pos = std::clamp((t - out.labels.slots[k].first) / slot_len, 0.0, 1.0);
      double gain = 0.55 + 0.45 * std::sin(std::numbers::pi * pos);
      const double edge = std::min(t - (kLead - fade), (spec.duration_s - kLead + fade) - t);
      gain *= std::clamp(edge / fade, 0.0, 1.0);
      for (std::size_t h = 0; h < harmonics; ++h) {
        const double fh = f0 * static_cast<double>(h + 1);
        amps[h] = fh < 0.49 * sr ? gain / static_cast<double>(h + 1) * std::pow(10.0, envelope_db(fh, spec.formants, f1) / 20.0) : 0.0;
      }
    }
    phase += kTwoPi * f0 / sr;
    if (phase > kTwoPi * 1e6) phase = std::fmod(phase, kTwoPi);
    double acc = 0.0;
    for (std::size_t h = 0; h < harmonics; ++h) {
      if (amps[h] != 0.0) acc += amps[h] * std::sin(static_cast<double>(h + 1) * phase + h_phase[h]);
    }
    voice[i] = acc;
  }
  const double vp = mean_power(voice);
  if (vp > 0.0) {
    const double g = kVoiceRms / std::sqrt(vp);
    for (double& v : voice) v *= g;
  }

  // Token bursts: band-shaped Gaussian noise in the middle of each slot.
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double bin_ramp = 0.015;
  for (std::size_t k = 0; k < count; ++k) {
    const double slot_start = out.labels.slots[k].first;
    const auto b0 = static_cast<std::size_t>(std::lround((slot_start + kBurstBegin * slot_len) * sr));
    const auto b1 = std::min(n, static_cast<std::size_t>(std::lround((slot_start + kBurstEnd * slot_len) * sr)));
    if (b1 <= b0) continue;
    const std::size_t len = b1 - b0;
    const std::size_t m = next_power_of_two(len);
    std::vector<double> white(m);
    for (double& v : white) v = gauss(rng);
    auto spec_bins = rfft(white);
    const auto pattern = token_band_pattern(spec.content_tokens[k]);
    const double bin_hz = sr / static_cast<double>(m);
    for (std::size_t f = 0; f < spec_bins.size(); ++f) {
      const double hz = static_cast<double>(f) * bin_hz;
      const double band = (hz - kTokenBandLowHz) / kTokenBandWidthHz;
      double g = 0.0;
      if (band >= 0.0 && band < kTokenBands) g = pattern[static_cast<std::size_t>(band)] ? 1.0 : kInactiveBandGain;
      spec_bins[f] *= g;
    }
    auto burst = irfft(spec_bins, m);
    burst.resize(len);
    const double bp = mean_power(burst);
    if (!(bp > 0.0)) continue;
    const double g = kBurstRms / std::sqrt(bp);
    const double ramp = bin_ramp * sr;
    for (std::size_t i = 0; i < len; ++i) {
      const double d = std::min(static_cast<double>(i), static_cast<double>(len - 1 - i));
      const double e = d < ramp ? 0.5 - 0.5 * std::cos(std::numbers::pi * d / ramp) : 1.0;
      voice[b0 + i] += g * e * burst[i];
    }
  }

  out.audio = Waveform{std::move(voice), sample_rate};
  clip_in_place(out.audio);
  return out;
}

}  // namespace cogsr::dsp
