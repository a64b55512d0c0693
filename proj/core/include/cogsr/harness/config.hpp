#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cogsr/dsp/noise.hpp"
#include "cogsr/error.hpp"
#include "cogsr/eval/corpus.hpp"
#include "cogsr/flow/model.hpp"

namespace cogsr::harness {

// Malformed, incomplete or inconsistent run configuration.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct CorpusConfig {
  std::size_t count = 200;
  std::size_t utterances_per_speaker = 5;
  std::array<double, 2> f0_hz{90.0, 250.0};
  std::array<double, 2> timbre_hz{1200.0, 2200.0};  // speaker's lower timbre formant
  std::array<std::size_t, 2> tokens_per_utterance{3, 5};
  std::array<double, 2> slot_s{0.25, 0.35};
  int vocab_size = 14;
  std::uint64_t seed = 1;
};

struct DegradationConfig {
  std::array<double, 2> cutoff_hz{1000.0, 4000.0};
  double cutoff_grid_hz = 250.0;
  std::array<double, 2> snr_db{5.0, 15.0};
  double clean_fraction = 0.25;
  std::vector<dsp::NoiseKind> noise_kinds{dsp::NoiseKind::pink, dsp::NoiseKind::bursts, dsp::NoiseKind::hum};
};

struct ModelSection {
  flow::DiTConfig dit;
  std::size_t fourier_k = 8;
  std::size_t pitch_dim = 16;
};

struct TrainingConfig {
  std::size_t steps = 2000;
  std::size_t batch = 8;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t warmup_steps = 100;
  double min_lr_fraction = 0.1;
  double clip_norm = 1.0;
  std::size_t val_every = 250;
  std::size_t log_every = 50;
  std::uint64_t seed = 7;
};

struct EvaluationConfig {
  std::vector<eval::EvalCondition> conditions;
  std::size_t steps = 32;
  std::uint64_t seed = 11;
  bool cutoff_hint = true;
  std::size_t lsd_fft_len = 512;
  std::size_t lsd_hop = 128;
};

struct AblationConfig {
  bool disable_cot = false;
  bool transcript_only = false;
  bool disable_acoustic_priors = false;
};

struct RunConfig {
  CorpusConfig corpus;
  DegradationConfig degradation;
  ModelSection model;
  TrainingConfig training;
  EvaluationConfig evaluation;
  AblationConfig ablation;

  flow::ModelConfig model_config(std::size_t vocab_size) const;
  eval::EvalOptions eval_options() const;
};

// Strict parse: every key is required and unknown keys are rejected. Throws
// ConfigError with the offending key path.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical serialization (fixed key order, shortest round-trip numbers).
std::string canonical_json(const RunConfig& c);
// Hex FNV-1a of canonical_json.
std::string fingerprint(const RunConfig& c);

// Throws ConfigError for out-of-range or inconsistent values.
void validate(const RunConfig& c);

}  // namespace cogsr::harness
