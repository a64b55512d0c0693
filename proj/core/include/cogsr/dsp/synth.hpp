#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

struct Formant {
  double center_hz = 0.0;
  double width_hz = 100.0;
  double gain_db = 0.0;
};

// Content tokens are named "S0".."S{n-1}". Each token owns a distinct on/off
// pattern over eight 500 Hz sub-bands between 4 and 8 kHz (any two patterns
// differ in at least four sub-bands). Consecutive pairs of tokens share a
// low-band vowel colour (first formant), so the low band alone tells a token's
// group but not the token within it.
inline constexpr int kMaxTokens = 14;
inline constexpr int kTokenBands = 8;
inline constexpr double kTokenBandLowHz = 4000.0;
inline constexpr double kTokenBandWidthHz = 500.0;

std::string token_name(int token);
// Returns -1 for strings that are not token names.
int token_id(std::string_view name);
std::array<bool, kTokenBands> token_band_pattern(int token);
inline int token_group(int token) { return token / 2; }
double group_first_formant_hz(int group);

struct SyntheticUtteranceSpec {
  double f0_hz = 120.0;
  double vibrato_depth = 0.02;  // fraction of f0
  double vibrato_rate_hz = 5.0;
  std::vector<Formant> formants;  // speaker envelope, added to the token formant
  std::vector<int> content_tokens;
  double duration_s = 1.0;
  std::uint64_t rng_seed = 0;
};

void validate(const SyntheticUtteranceSpec& spec);

struct UtteranceLabels {
  std::vector<int> tokens;
  double f0_hz = 0.0;
  std::vector<std::pair<double, double>> slots;  // [start, end) seconds per token
};

struct SynthesizedUtterance {
  Waveform audio;
  UtteranceLabels labels;
};

// Time span of each slot carrying the high-band burst, as a fraction of the slot.
inline constexpr double kBurstBegin = 0.2;
inline constexpr double kBurstEnd = 0.8;

SynthesizedUtterance synth_utterance(const SyntheticUtteranceSpec& spec, int sample_rate = 16000);

}  // namespace cogsr::dsp
