#include "cogsr/conditioning/priors.hpp"

#include <cmath>
#include <numbers>

#include "cogsr/conditioning/vocabulary.hpp"
#include "cogsr/error.hpp"

namespace cogsr::conditioning {

using numerics::Init;
using numerics::Tensor;

std::vector<double> fourier_embed_bandwidth(double cutoff_hz, std::size_t k, int sample_rate) {
  const double nyquist = 0.5 * sample_rate;
  if (!(cutoff_hz > 0.0 && cutoff_hz <= nyquist)) {
    throw ValidationError("bandwidth cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, " +
                          std::to_string(nyquist) + "]");
  }
  if (k < 2) throw ValidationError("Fourier feature count must be at least 2");
  const double b = cutoff_hz / nyquist;
  std::vector<double> out(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    const double f = std::pow(64.0, static_cast<double>(i) / static_cast<double>(k - 1));
    out[i] = std::sin(2.0 * std::numbers::pi * f * b);
    out[k + i] = std::cos(2.0 * std::numbers::pi * f * b);
  }
  return out;
}

std::vector<double> position_features(double p) {
  std::vector<double> out(2 * kPositionHarmonics, 0.0);
  if (p < 0.0) return out;
  for (std::size_t m = 0; m < kPositionHarmonics; ++m) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(m + 1) * p;
    out[m] = std::sin(a);
    out[kPositionHarmonics + m] = std::cos(a);
  }
  return out;
}

std::vector<double> semantic_positions(std::span<const int> ids) {
  std::vector<double> pos(ids.size(), -1.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != Vocabulary::kContentMarker) continue;
    std::size_t end = i + 1;
    while (end < ids.size() && ids[end] > Vocabulary::kQualityMarker) ++end;
    const double n = static_cast<double>(end - i - 1);
    for (std::size_t k = i + 1; k < end; ++k) pos[k] = (static_cast<double>(k - i - 1) + 0.5) / n;
    i = end - 1;
  }
  return pos;
}

std::vector<double> pitch_features(const dsp::PitchStats& s) {
  return {s.median_f0_hz / 500.0, s.log_f0_std, s.voiced_fraction};
}

template <typename T>
void add_conditioning_parameters(numerics::ParameterSet<T>& p, const ConditioningConfig& cfg, std::mt19937_64& rng) {
  if (cfg.vocab_size == 0 || cfg.cond_width == 0 || cfg.pitch_dim == 0 || cfg.fourier_k < 2) {
    throw ValidationError("conditioning widths must be positive");
  }
  const std::size_t w = cfg.cond_width, bw = 2 * cfg.fourier_k, pd = cfg.pitch_dim;
  p.create("cond.embedding", {cfg.vocab_size, w}, Init::normal_small, rng);
  p.create("cond.position.w", {2 * kPositionHarmonics, w}, Init::fan_in_uniform, rng);
  p.create("cond.pitch.w", {3, pd}, Init::fan_in_uniform, rng);
  p.create("cond.pitch.b", {pd}, Init::zeros, rng);
  p.create("cond.bw_token.w", {bw, w}, Init::fan_in_uniform, rng);
  p.create("cond.bw_token.b", {w}, Init::zeros, rng);
  p.create("cond.pitch_token.w", {pd, w}, Init::fan_in_uniform, rng);
  p.create("cond.pitch_token.b", {w}, Init::zeros, rng);
  p.create("cond.bw_global.w", {bw, w}, Init::fan_in_uniform, rng);
  p.create("cond.bw_global.b", {w}, Init::zeros, rng);
  p.create("cond.pitch_global.w", {pd, w}, Init::fan_in_uniform, rng);
  p.create("cond.pitch_global.b", {w}, Init::zeros, rng);
  p.create("cond.null_bw", {1, w}, Init::normal_small, rng);
  p.create("cond.null_pitch", {1, w}, Init::normal_small, rng);
}

template <typename T>
Tensor<T> embed_semantic(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params, std::span<const int> ids) {
  if (ids.empty()) throw ValidationError("semantic token sequence is empty");
  return tape.embedding(params.get("cond.embedding"), ids);
}

template <typename T>
Tensor<T> embed_semantic_positioned(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                    std::span<const int> ids) {
  const auto sem = embed_semantic(tape, params, ids);
  const auto pos = semantic_positions(ids);
  std::vector<T> feats;
  feats.reserve(pos.size() * 2 * kPositionHarmonics);
  for (double p : pos) {
    for (double f : position_features(p)) feats.push_back(static_cast<T>(f));
  }
  const auto pf = Tensor<T>::from({pos.size(), 2 * kPositionHarmonics}, std::move(feats));
  return tape.add(sem, tape.matmul(pf, params.get("cond.position.w")));
}

template <typename T>
Tensor<T> embed_pitch_stats(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                            const dsp::PitchStats& stats) {
  const auto f = pitch_features(stats);
  const auto x = Tensor<T>::from({1, 3}, {static_cast<T>(f[0]), static_cast<T>(f[1]), static_cast<T>(f[2])});
  return tape.silu(tape.linear(x, params.get("cond.pitch.w"), params.get("cond.pitch.b")));
}

template <typename T>
ConditioningBundle<T> assemble_conditioning(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                            const Tensor<T>& sem, const Tensor<T>& c_bw, const Tensor<T>& c_pitch) {
  const auto bw_w = params.get("cond.bw_token.w");
  const auto pt_w = params.get("cond.pitch_token.w");
  const std::size_t width = bw_w.dim(1);
  if (sem.ndim() != 2 || sem.cols() != width) {
    throw DimensionError("semantic embedding " + numerics::shape_to_string(sem.shape()) + " does not have width " +
                         std::to_string(width));
  }
  if (c_bw.rows() != 1 || c_bw.cols() != bw_w.dim(0)) {
    throw DimensionError("c_bw " + numerics::shape_to_string(c_bw.shape()) + " expected [1x" +
                         std::to_string(bw_w.dim(0)) + "]");
  }
  if (c_pitch.rows() != 1 || c_pitch.cols() != pt_w.dim(0)) {
    throw DimensionError("c_pitch " + numerics::shape_to_string(c_pitch.shape()) + " expected [1x" +
                         std::to_string(pt_w.dim(0)) + "]");
  }
  const auto bw_tok = tape.linear(c_bw, bw_w, params.get("cond.bw_token.b"));
  const auto pt_tok = tape.linear(c_pitch, pt_w, params.get("cond.pitch_token.b"));
  const Tensor<T> parts[] = {sem, bw_tok, pt_tok};
  ConditioningBundle<T> b;
  b.tokens = tape.concat(parts, 0);
  b.global = tape.add(tape.linear(c_bw, params.get("cond.bw_global.w"), params.get("cond.bw_global.b")),
                      tape.linear(c_pitch, params.get("cond.pitch_global.w"), params.get("cond.pitch_global.b")));
  b.semantic_len = sem.rows();
  return b;
}

template <typename T>
ConditioningBundle<T> assemble_conditioning_without_priors(numerics::Tape<T>& tape,
                                                           const numerics::ParameterSet<T>& params,
                                                           const Tensor<T>& sem) {
  const auto null_bw = params.get("cond.null_bw");
  if (sem.ndim() != 2 || sem.cols() != null_bw.cols()) throw DimensionError("semantic embedding width mismatch");
  const Tensor<T> parts[] = {sem, null_bw, params.get("cond.null_pitch")};
  ConditioningBundle<T> b;
  b.tokens = tape.concat(parts, 0);
  b.global = Tensor<T>::zeros({1, null_bw.cols()});
  b.semantic_len = sem.rows();
  return b;
}

template <typename T>
ConditioningBundle<T> build_conditioning(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                         const ConditioningConfig& cfg, const ConditioningInputs& in) {
  for (int id : in.semantic_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw ValidationError("semantic token id " + std::to_string(id) + " outside the vocabulary");
    }
  }
  const auto sem = embed_semantic_positioned(tape, params, in.semantic_ids);
  if (!in.use_priors) return assemble_conditioning_without_priors(tape, params, sem);
  const auto bw = fourier_embed_bandwidth(in.cutoff_hz, cfg.fourier_k, in.sample_rate);
  const auto c_bw = Tensor<T>::from({1, bw.size()}, std::vector<T>(bw.begin(), bw.end()));
  const auto c_pitch = embed_pitch_stats(tape, params, in.pitch);
  return assemble_conditioning(tape, params, sem, c_bw, c_pitch);
}

#define COGSR_INSTANTIATE(T)                                                                                      \
  template void add_conditioning_parameters<T>(numerics::ParameterSet<T>&, const ConditioningConfig&,           \
                                               std::mt19937_64&);                                               \
  template Tensor<T> embed_semantic<T>(numerics::Tape<T>&, const numerics::ParameterSet<T>&,                     \
                                       std::span<const int>);                                                   \
  template Tensor<T> embed_semantic_positioned<T>(numerics::Tape<T>&, const numerics::ParameterSet<T>&,          \
                                                  std::span<const int>);                                        \
  template Tensor<T> embed_pitch_stats<T>(numerics::Tape<T>&, const numerics::ParameterSet<T>&,                  \
                                          const dsp::PitchStats&);                                              \
  template ConditioningBundle<T> assemble_conditioning<T>(numerics::Tape<T>&, const numerics::ParameterSet<T>&,  \
                                                          const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template ConditioningBundle<T> assemble_conditioning_without_priors<T>(                                        \
      numerics::Tape<T>&, const numerics::ParameterSet<T>&, const Tensor<T>&);                                   \
  template ConditioningBundle<T> build_conditioning<T>(numerics::Tape<T>&, const numerics::ParameterSet<T>&,     \
                                                       const ConditioningConfig&, const ConditioningInputs&);
COGSR_INSTANTIATE(float)
COGSR_INSTANTIATE(double)
#undef COGSR_INSTANTIATE

}  // namespace cogsr::conditioning
