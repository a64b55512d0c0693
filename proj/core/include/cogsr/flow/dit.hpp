#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "cogsr/conditioning/priors.hpp"
#include "cogsr/numerics/parameters.hpp"
#include "cogsr/numerics/tape.hpp"

namespace cogsr::flow {

struct DiTConfig {
  std::size_t depth = 4;
  std::size_t model_dim = 128;
  std::size_t num_heads = 4;
  std::size_t latent_dim = 64;
  std::size_t max_frames = 128;
  std::size_t cond_width = 64;
  std::size_t mlp_ratio = 4;
  std::size_t time_embed_dim = 64;
  std::uint64_t seed = 0;
};

// Throws ValidationError unless every size is positive and heads divide model_dim.
void validate(const DiTConfig& cfg);

// Registers "dit.*" parameters. The output and gain projections start at zero
// so an untrained model predicts zero velocity.
template <typename T>
void add_dit_parameters(numerics::ParameterSet<T>& params, const DiTConfig& cfg, std::mt19937_64& rng);

// Sinusoidal embedding of t in [0, 1]: [1 x dim], sin half then cos half.
std::vector<double> timestep_embedding(double t, std::size_t dim);

// Where the frames sit in the whole utterance: frame f is utterance frame
// offset + f out of total. total = 0 means the frames are the whole utterance.
struct FrameWindow {
  std::size_t offset = 0;
  std::size_t total = 0;
};

// Velocity prediction for one item.
//   xt, lr: [frames x latent_dim], frames <= max_frames
// Frames carry a sinusoidal index encoding plus projected utterance-relative
// position features, which content tokens also carry.
// Pre-norm blocks: self-attention, cross-attention over bundle.tokens, MLP.
// silu(time MLP(t) + bundle.global) yields a shift and scale for every
// normalization in every block and before the output. The head predicts
// out(h) + gain(h) * xt, both zero-initialised. Throws DimensionError for
// misaligned inputs.
template <typename T>
numerics::Tensor<T> dit_forward(numerics::Tape<T>& tape, const numerics::ParameterSet<T>& params,
                                const DiTConfig& cfg, const numerics::Tensor<T>& xt, double t,
                                const numerics::Tensor<T>& lr, const conditioning::ConditioningBundle<T>& bundle,
                                FrameWindow window = {});

}  // namespace cogsr::flow
