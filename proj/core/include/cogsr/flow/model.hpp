#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cogsr/conditioning/cot.hpp"
#include "cogsr/conditioning/priors.hpp"
#include "cogsr/conditioning/vocabulary.hpp"
#include "cogsr/dsp/mdct.hpp"
#include "cogsr/dsp/pitch.hpp"
#include "cogsr/dsp/waveform.hpp"
#include "cogsr/flow/dit.hpp"
#include "cogsr/numerics/adamw.hpp"
#include "cogsr/numerics/parameters.hpp"

namespace cogsr::flow {

struct ModelConfig {
  DiTConfig dit;
  conditioning::ConditioningConfig cond;  // vocab_size is taken from the vocabulary
  conditioning::SemanticMode semantic_mode = conditioning::SemanticMode::full;
  bool use_priors = true;
};

// Everything a restoration or a training step needs besides the audio.
template <typename T>
struct ModelState {
  ModelConfig config;
  conditioning::Vocabulary vocab;
  dsp::NormalizationStats stats;
  numerics::ParameterSet<T> params;
  numerics::AdamW<T> optimizer;
  std::uint64_t seed = 0;  // training seed; rng below starts from it
  std::mt19937_64 rng;     // draws x0 and t for training samples
  std::string fingerprint;  // opaque run identifier stored with checkpoints

  std::uint64_t step() const { return optimizer.state().step; }
};

// Parameters are initialised from config.dit.seed; the training rng from train_seed.
template <typename T>
ModelState<T> create_model(ModelConfig config, conditioning::Vocabulary vocab, dsp::NormalizationStats stats,
                           numerics::AdamWConfig adam, std::uint64_t train_seed);

// Semantic ids and priors for one utterance, following the model's ablation settings.
conditioning::ConditioningInputs conditioning_inputs(const ModelConfig& config, const conditioning::Vocabulary& vocab,
                                                     const conditioning::CoTRecord& record, double cutoff_hz,
                                                     int sample_rate, const dsp::PitchStats& pitch);

template <typename T>
numerics::Tensor<T> to_tensor(const dsp::LatentSequence& l);

struct TrainItem {
  std::string id;
  dsp::LatentSequence x1;  // normalized HR latent
  dsp::LatentSequence lr;  // normalized LR latent on the same frame grid
  conditioning::ConditioningInputs cond;
  FrameWindow window;  // where the crop sits in the utterance
};

struct StepOptions {
  double lr_scale = 1.0;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

// One AdamW update on the mean rectified-flow loss over the batch; each item
// gets fresh (x0, t) from state.rng. Returns the mean loss. Throws
// RuntimeFailure when the loss is not finite.
template <typename T>
double train_step(ModelState<T>& state, std::span<const TrainItem> batch, const StepOptions& options = {});

// Mean loss over fixed samples without updating anything (validation).
template <typename T>
double evaluate_loss(const ModelState<T>& state, std::span<const TrainItem> items, std::uint64_t seed);

// Euler integration of the learned field from x0, conditioned on lr. Sequences
// longer than max_frames are processed in independent chunks.
template <typename T>
dsp::LatentSequence euler_sample(const ModelState<T>& state, const dsp::LatentSequence& x0,
                                 const dsp::LatentSequence& lr, const conditioning::ConditioningInputs& cond,
                                 std::size_t steps);

struct RestoreOptions {
  std::size_t steps = 32;
  std::uint64_t seed = 0;
  // Known input bandwidth; estimated from the audio when empty.
  std::optional<double> cutoff_hz;
};

struct RestoreTimings {
  double encode_s = 0, condition_s = 0, sample_s = 0, decode_s = 0;
};

struct RestoreResult {
  dsp::Waveform audio;
  double cutoff_hz = 0.0;
  dsp::PitchStats pitch;
  RestoreTimings timings;
};

template <typename T>
RestoreResult restore(const ModelState<T>& state, const dsp::Waveform& lr, const conditioning::CoTRecord& record,
                      const RestoreOptions& options = {});

// Writes `path` (binary parameters and optimizer moments) and `path`.json
// (config, vocabulary, normalization stats, seed, step, rng state).
template <typename T>
void save_model(const ModelState<T>& state, const std::filesystem::path& path);
template <typename T>
ModelState<T> load_model(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

}  // namespace cogsr::flow
