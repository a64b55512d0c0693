#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cogsr/dsp/synth.hpp"
#include "cogsr/dsp/waveform.hpp"

namespace cogsr::eval {

using ContentFeature = std::array<double, dsp::kTokenBands>;

// Log10 power in each token sub-band over the middle of a slot, relative to
// the slot's mean power per bin and floored at -50 dB.
ContentFeature slot_feature(const dsp::Waveform& w, double slot_start_s, double slot_end_s);

// One reference feature per content token, measured on clean synthesis.
class TemplateBank {
 public:
  static TemplateBank build(int num_tokens = dsp::kMaxTokens, int sample_rate = 16000, std::uint64_t seed = 0);

  // Token whose template correlates best with the feature (lowest id on ties).
  int classify(const ContentFeature& f) const;
  int num_tokens() const noexcept { return static_cast<int>(templates_.size()); }
  const ContentFeature& feature(int token) const { return templates_.at(static_cast<std::size_t>(token)); }

 private:
  std::vector<ContentFeature> templates_;
};

// Classified token for every labelled slot.
std::vector<int> classify_tokens(const dsp::Waveform& w, const dsp::UtteranceLabels& labels, const TemplateBank& bank);

// WER of the classified tokens against the labels.
double content_error_rate(const dsp::Waveform& w, const dsp::UtteranceLabels& labels, const TemplateBank& bank);

// Fraction of slots classified as the wrong token.
double slot_error_rate(std::span<const int> ref, std::span<const int> hyp);

}  // namespace cogsr::eval
