#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "cogsr/dsp/pitch.hpp"
#include "cogsr/numerics/parameters.hpp"
#include "cogsr/numerics/tape.hpp"

namespace cogsr::conditioning {

// [sin(2 pi f_k b) ..., cos(2 pi f_k b) ...] with b = cutoff / Nyquist and
// f_k = 64^(k / (K - 1)), k = 0..K-1 (log-spaced over [1, 64]).
std::vector<double> fourier_embed_bandwidth(double cutoff_hz, std::size_t k, int sample_rate);

// Harmonics used for utterance-relative position features.
inline constexpr std::size_t kPositionHarmonics = 8;

// [sin(2 pi m p) ..., cos(2 pi m p) ...] for m = 1..kPositionHarmonics, where
// p in [0, 1] is a position within the utterance. Negative p yields zeros.
std::vector<double> position_features(double p);

// Utterance-relative position of every semantic token: (k + 0.5) / n for the
// k-th of n content words, -1 for everything else.
std::vector<double> semantic_positions(std::span<const int> ids);

// (median / 500 Hz, log-f0 std, voiced fraction).
std::vector<double> pitch_features(const dsp::PitchStats& s);

struct ConditioningConfig {
  std::size_t vocab_size = 0;
  std::size_t fourier_k = 8;
  std::size_t cond_width = 64;
  std::size_t pitch_dim = 16;
};

// Registers the learned conditioning parameters (all prefixed "cond."):
// embedding table, content position projection, pitch projection, prior-token projections, global
// projections and the null prior tokens used when priors are disabled.
template <typename T>
void add_conditioning_parameters(numerics::ParameterSet<T>& params, const ConditioningConfig& cfg,
                                 std::mt19937_64& rng);

// Embedding rows for the ids: [len x cond_width].
template <typename T>
numerics::Tensor<T> embed_semantic(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                   std::span<const int> ids);

// silu(features * W + b): [1 x pitch_dim].
template <typename T>
numerics::Tensor<T> embed_pitch_stats(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                      const dsp::PitchStats& stats);

template <typename T>
struct ConditioningBundle {
  numerics::Tensor<T> tokens;  // [(semantic_len + 2) x cond_width]
  numerics::Tensor<T> global;  // [1 x cond_width]
  std::size_t semantic_len = 0;
};

// tokens = [sem ; W_bt c_bw + b ; W_pt c_pitch + b], global = proj_bw(c_bw) + proj_pitch(c_pitch).
// c_bw is [1 x 2K], c_pitch is [1 x pitch_dim]. Throws DimensionError on width mismatch.
template <typename T>
ConditioningBundle<T> assemble_conditioning(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                            const numerics::Tensor<T>& sem, const numerics::Tensor<T>& c_bw,
                                            const numerics::Tensor<T>& c_pitch);

// Priors replaced by the learned null tokens; global vector is zero.
template <typename T>
ConditioningBundle<T> assemble_conditioning_without_priors(numerics::Tape<T>& tape,
                                                           const numerics::ParameterSet<T>& params,
                                                           const numerics::Tensor<T>& sem);

// Embedding rows plus the projected position features of the content words.
template <typename T>
numerics::Tensor<T> embed_semantic_positioned(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                              std::span<const int> ids);

// Everything needed to build a bundle for one utterance.
struct ConditioningInputs {
  std::vector<int> semantic_ids;
  double cutoff_hz = 8000.0;
  int sample_rate = 16000;
  dsp::PitchStats pitch;
  bool use_priors = true;
};

template <typename T>
ConditioningBundle<T> build_conditioning(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                         const ConditioningConfig& cfg, const ConditioningInputs& in);

}  // namespace cogsr::conditioning
