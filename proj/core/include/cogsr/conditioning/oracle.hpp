#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cogsr/conditioning/cot.hpp"
#include "cogsr/dsp/degrade.hpp"
#include "cogsr/dsp/noise.hpp"

namespace cogsr::conditioning {

// Ground truth the record oracle turns into a CoT record. It stands in for an
// audio-language model describing the degraded input.
struct RecordFacts {
  double f0_hz = 120.0;
  std::string emotion = "Neutral";
  std::vector<int> tokens;
  double cutoff_hz = 8000.0;
  double snr_db = dsp::kNoNoise;
  std::optional<dsp::NoiseKind> noise;  // empty when snr is +inf
  int sample_rate = 16000;
};

// Below this median f0 the oracle reports Male.
inline constexpr double kGenderSplitHz = 165.0;

std::string noise_description(const std::optional<dsp::NoiseKind>& kind);
std::vector<std::string> quality_descriptors(double cutoff_hz, double snr_db, int sample_rate);

CoTRecord oracle_record(const RecordFacts& facts);

// Substitutes each content token with a different token (uniform over the
// first vocab_tokens ids) with probability p. Returns the record and the
// cache source tag ("oracle" when p == 0).
std::pair<CoTRecord, std::string> corrupt_record(const CoTRecord& r, double p, int vocab_tokens, std::uint64_t seed);

// Every word the oracle can emit for a corpus with vocab_tokens content tokens.
std::vector<std::string> oracle_words(int vocab_tokens);

}  // namespace cogsr::conditioning
