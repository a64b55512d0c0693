#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::eval {

inline constexpr std::size_t kSpeakerBands = 16;
inline constexpr std::size_t kSpeakerEmbeddingDim = 3 + kSpeakerBands;
inline constexpr double kMinSpeakerSeconds = 0.5;
// Envelope range: above the vowel-colour formants, below the token sub-bands.
inline constexpr double kEnvelopeLowHz = 1000.0;
inline constexpr double kEnvelopeHighHz = 4000.0;

// Per-dimension moments used to z-score raw embeddings. Empty means identity.
struct SpeakerEmbeddingStats {
  std::vector<double> mean;
  std::vector<double> std;

  static SpeakerEmbeddingStats compute(std::span<const std::vector<double>> raw);
  bool empty() const noexcept { return mean.empty(); }
};

// [log median f0, log-f0 std, voiced fraction, log10 power means of 16 equal
// bands between 1 and 4 kHz over active frames, minus their average so the
// envelope ignores overall gain]. Throws ValidationError below 0.5 s.
std::vector<double> raw_speaker_features(const dsp::Waveform& w);

// raw_speaker_features z-scored by stats.
std::vector<double> proxy_speaker_embedding(const dsp::Waveform& w, const SpeakerEmbeddingStats& stats = {});

}  // namespace cogsr::eval
