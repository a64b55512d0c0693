#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cogsr/eval/corpus.hpp"
#include "cogsr/flow/model.hpp"
#include "cogsr/harness/config.hpp"

namespace cogsr::harness {

inline constexpr int kSampleRate = 16000;

struct SynthDataSummary {
  std::size_t train = 0, val = 0, test = 0;
  std::string fingerprint;
};

// Writes wav/, train/val/test manifests, cot_cache.jsonl, speaker_stats.json
// and dataset.json. Speakers never straddle splits.
SynthDataSummary cmd_synth_data(const RunConfig& config, const std::filesystem::path& out_dir);

struct TrainSummary {
  std::size_t steps = 0;
  double initial_loss = 0.0;  // mean of the first 20 logged steps
  double final_loss = 0.0;    // mean of the last 20 logged steps
  double best_val_loss = 0.0;
  std::size_t best_step = 0;
  std::string data_order_hash;
  std::string fingerprint;
};

// Trains from scratch (or resumes from out_dir/last.ckpt) and writes
// best.ckpt, last.ckpt, loss_log.jsonl and train_summary.json. stop_at ends
// the session early at that step; a later resume continues the same run.
TrainSummary cmd_train(const RunConfig& config, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir, bool resume = false,
                       std::optional<std::size_t> stop_at = std::nullopt);

struct RestoreRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path in_wav;
  std::filesystem::path out_wav;
  std::string cot_text;                // used when cache is empty
  std::filesystem::path cache;         // CoT cache file
  std::string cache_id;
  std::size_t steps = 32;
  std::uint64_t seed = 0;
  std::optional<double> cutoff_hz;
};

flow::RestoreResult cmd_restore(const RestoreRequest& request);

// Writes <out_prefix>.json and <out_prefix>.txt.
eval::MetricsReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& checkpoint,
                                 const std::filesystem::path& manifest, const std::filesystem::path& out_prefix);

struct AblationRow {
  std::string name;
  std::string slug;
  double content_error = 0.0;
  double lsd = 0.0;
  double sim = 0.0;
  std::string data_order_hash;
};

// Trains and evaluates Full, w/o CoT, transcript-only and w/o priors with the
// same seeds and budget; writes ablation.json and ablation.txt. Rows use the
// first evaluation condition. Throws RuntimeFailure when the runs saw
// different data.
std::vector<AblationRow> cmd_ablate(const RunConfig& config, const std::filesystem::path& data_dir,
                                    const std::filesystem::path& out_dir);

std::string ablation_table(const std::vector<AblationRow>& rows);

// Learning-rate multiplier: linear warmup, then cosine decay to min_lr_fraction.
double lr_scale(const TrainingConfig& t, std::size_t step);

}  // namespace cogsr::harness
