#include "cogsr/conditioning/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "cogsr/dsp/synth.hpp"
#include "cogsr/error.hpp"

namespace cogsr::conditioning {

std::string noise_description(const std::optional<dsp::NoiseKind>& kind) {
  if (!kind) return "None";
  switch (*kind) {
    case dsp::NoiseKind::pink: return "Pink noise";
    case dsp::NoiseKind::bursts: return "Intermittent bursts";
    case dsp::NoiseKind::hum: return "Electrical hum";
  }
  return "None";
}

std::vector<std::string> quality_descriptors(double cutoff_hz, double snr_db, int sample_rate) {
  std::vector<std::string> q;
  const double ratio = cutoff_hz / (0.5 * sample_rate);
  if (ratio <= 0.3) {
    q = {"Low bandwidth", "muffled"};
  } else if (ratio < 0.99) {
    q = {"Limited bandwidth"};
  } else {
    q = {"Full bandwidth"};
  }
  if (std::isinf(snr_db)) q.emplace_back("clean");
  else if (snr_db <= 8.0) q.emplace_back("very noisy");
  else if (snr_db <= 12.0) q.emplace_back("noisy");
  else q.emplace_back("slightly noisy");
  return q;
}

CoTRecord oracle_record(const RecordFacts& facts) {
  CoTRecord r;
  r.gender = facts.f0_hz < kGenderSplitHz ? Gender::male : Gender::female;
  r.emotion = facts.emotion;
  r.noise = noise_description(std::isinf(facts.snr_db) ? std::nullopt : facts.noise);
  for (int t : facts.tokens) r.content.push_back(dsp::token_name(t));
  r.quality = quality_descriptors(facts.cutoff_hz, facts.snr_db, facts.sample_rate);
  return r;
}

std::pair<CoTRecord, std::string> corrupt_record(const CoTRecord& r, double p, int vocab_tokens, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("corruption probability must be in [0, 1]");
  if (p == 0.0) return {r, "oracle"};
  if (vocab_tokens < 2) throw ValidationError("corruption needs at least two content tokens");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, vocab_tokens - 2);
  CoTRecord out = r;
  for (auto& w : out.content) {
    if (u(rng) >= p) continue;
    const int cur = dsp::token_id(w);
    int t = pick(rng);
    if (cur >= 0 && t >= cur) ++t;
    w = dsp::token_name(t);
  }
  char tag[48];
  std::snprintf(tag, sizeof tag, "corrupted(%g)", p);
  return {out, tag};
}

std::vector<std::string> oracle_words(int vocab_tokens) {
  std::vector<std::string> w = {"Male", "Female", "Unknown", "Calm", "Neutral", "Excited", "Anxious", "None"};
  for (auto k : {dsp::NoiseKind::pink, dsp::NoiseKind::bursts, dsp::NoiseKind::hum}) w.push_back(noise_description(k));
  for (const auto& q : {"Low bandwidth", "muffled", "Limited bandwidth", "Full bandwidth", "clean", "very noisy", "noisy",
                        "slightly noisy"}) {
    w.emplace_back(q);
  }
  for (int t = 0; t < vocab_tokens; ++t) w.push_back(dsp::token_name(t));
  return w;
}

}  // namespace cogsr::conditioning
