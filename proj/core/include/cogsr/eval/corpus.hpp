#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cogsr/conditioning/cot.hpp"
#include "cogsr/dsp/degrade.hpp"
#include "cogsr/dsp/synth.hpp"
#include "cogsr/eval/content.hpp"
#include "cogsr/eval/metrics.hpp"
#include "cogsr/eval/speaker.hpp"
#include "cogsr/flow/model.hpp"

namespace cogsr::eval {

struct EvalItem {
  std::string id;
  dsp::Waveform hr;
  dsp::UtteranceLabels labels;
  std::string emotion = "Neutral";
};

struct EvalCondition {
  double cutoff_hz = 4000.0;
  double snr_db = dsp::kNoNoise;
  dsp::NoiseKind noise = dsp::NoiseKind::pink;
};

// Supplies the semantic record for a degraded utterance.
using RecordSource =
    std::function<conditioning::CoTRecord(const EvalItem&, const EvalCondition&, const dsp::Waveform& degraded)>;

// Oracle description of the degraded input built from the ground truth.
conditioning::CoTRecord oracle_eval_record(const EvalItem& item, const EvalCondition& c, const dsp::Waveform&);

struct EvalOptions {
  std::size_t steps = 32;
  std::uint64_t seed = 0;
  bool cutoff_hint = true;  // give the sampler the condition cutoff instead of estimating it
  double max_failure_fraction = 0.05;
  std::string config_fingerprint;
  LsdConfig lsd;
};

struct UtteranceMetrics {
  std::string id;
  double lsd = 0, lsd_highband = 0, lsd_input = 0, wer = 0, sim = 0, content_error_rate = 0;
};

struct MetricMeans {
  double lsd = 0, lsd_highband = 0, lsd_input = 0, wer = 0, sim = 0, content_error_rate = 0;
};

struct ConditionReport {
  EvalCondition condition;
  std::size_t failures = 0;
  std::vector<std::string> failed_ids;
  std::vector<UtteranceMetrics> per_utterance;
  MetricMeans means;
};

struct MetricsReport {
  std::string config_fingerprint;
  std::vector<ConditionReport> conditions;
};

MetricMeans mean_of(std::span<const UtteranceMetrics> rows);

// Everything but the restoration: degrade, describe, restore via `restorer`, score.
using Restorer = std::function<dsp::Waveform(const dsp::Waveform& degraded, const conditioning::CoTRecord& record,
                                             const EvalCondition& c, std::uint64_t seed)>;

struct EvalContext {
  const TemplateBank& bank;
  const SpeakerEmbeddingStats& speaker_stats;
  RecordSource records = oracle_eval_record;
};

MetricsReport evaluate_with(const Restorer& restorer, std::span<const EvalItem> items,
                            std::span<const EvalCondition> conditions, const EvalContext& ctx,
                            const EvalOptions& options);

// Restores every item under every condition with the model and aggregates.
// Failing utterances are excluded and counted; more than max_failure_fraction
// of a condition failing raises RuntimeFailure. Throws ValidationError for an
// empty item or condition list.
template <typename T>
MetricsReport evaluate_corpus(const flow::ModelState<T>& model, std::span<const EvalItem> items,
                              std::span<const EvalCondition> conditions, const EvalContext& ctx,
                              const EvalOptions& options);

// Degradation seed shared by every evaluator for one (item, condition).
std::uint64_t degradation_seed(const std::string& id, const EvalCondition& c, std::uint64_t seed);

std::string report_json(const MetricsReport& r);
// Fixed-width table, one row per condition.
std::string report_table(const MetricsReport& r);

}  // namespace cogsr::eval
