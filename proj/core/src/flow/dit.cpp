#include "cogsr/flow/dit.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cogsr/error.hpp"

namespace cogsr::flow {

using numerics::Init;
using numerics::ParameterSet;
using numerics::Tape;
using numerics::Tensor;

void validate(const DiTConfig& cfg) {
  if (cfg.depth == 0 || cfg.model_dim == 0 || cfg.num_heads == 0 || cfg.latent_dim == 0 || cfg.max_frames == 0 ||
      cfg.cond_width == 0 || cfg.mlp_ratio == 0 || cfg.time_embed_dim < 2 || cfg.time_embed_dim % 2 != 0) {
    throw ValidationError("DiT sizes must be positive (time_embed_dim even)");
  }
  if (cfg.model_dim % cfg.num_heads != 0) {
    throw ValidationError("model_dim " + std::to_string(cfg.model_dim) + " is not divisible by num_heads " +
                          std::to_string(cfg.num_heads));
  }
}

namespace {

std::string block_name(std::size_t l, const char* leaf) { return "dit.block" + std::to_string(l) + "." + leaf; }

template <typename T>
void add_linear(ParameterSet<T>& p, const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng,
                Init init = Init::fan_in_uniform) {
  p.create(name + ".w", {in, out}, init, rng);
  p.create(name + ".b", {out}, Init::zeros, rng);
}

template <typename T>
void add_norm(ParameterSet<T>& p, const std::string& name, std::size_t dim, std::mt19937_64& rng) {
  p.create(name + ".g", {dim}, Init::ones, rng);
  p.create(name + ".b", {dim}, Init::zeros, rng);
}

template <typename T>
Tensor<T> lin(Tape<T>& tape, const ParameterSet<T>& p, const std::string& name, const Tensor<T>& x) {
  return tape.linear(x, p.get(name + ".w"), p.get(name + ".b"));
}

template <typename T>
Tensor<T> norm(Tape<T>& tape, const ParameterSet<T>& p, const std::string& name, const Tensor<T>& x) {
  return tape.layer_norm(x, p.get(name + ".g"), p.get(name + ".b"), T(1e-5));
}

template <typename T>
Tensor<T> attention(Tape<T>& tape, const ParameterSet<T>& p, const std::string& prefix, const Tensor<T>& q_in,
                    const Tensor<T>& kv_in, std::size_t heads) {
  const auto q = lin(tape, p, prefix + ".q", q_in);
  const auto k = lin(tape, p, prefix + ".k", kv_in);
  const auto v = lin(tape, p, prefix + ".v", kv_in);
  const std::size_t d = q.cols() / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(d));
  std::vector<Tensor<T>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto qh = heads == 1 ? q : tape.slice(q, 1, h * d, (h + 1) * d);
    const auto kh = heads == 1 ? k : tape.slice(k, 1, h * d, (h + 1) * d);
    const auto vh = heads == 1 ? v : tape.slice(v, 1, h * d, (h + 1) * d);
    const auto scores = tape.scale(tape.matmul(qh, tape.transpose(kh)), scale);
    outs.push_back(tape.matmul(tape.softmax(scores), vh));
  }
  const auto merged = heads == 1 ? outs.front() : tape.concat(outs, 1);
  return lin(tape, p, prefix + ".o", merged);
}

// x * (1 + scale) + shift, with shift and scale read from columns
// [k*d, (k+2)*d) of the per-utterance modulation row.
template <typename T>
Tensor<T> modulate(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& mod, std::size_t k, std::size_t d) {
  const auto shift = tape.slice(mod, 1, k * d, (k + 1) * d);
  const auto scale = tape.slice(mod, 1, (k + 1) * d, (k + 2) * d);
  return tape.add(tape.add(x, tape.mul(x, scale)), shift);
}

template <typename T>
Tensor<T> positional_encoding(std::size_t frames, std::size_t dim) {
  std::vector<T> v(frames * dim);
  const std::size_t half = dim / 2;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
      v[f * dim + i] = static_cast<T>(std::sin(static_cast<double>(f) * freq));
      v[f * dim + half + i] = static_cast<T>(std::cos(static_cast<double>(f) * freq));
    }
  }
  return Tensor<T>::from({frames, dim}, std::move(v));
}

}  // namespace

std::vector<double> timestep_embedding(double t, std::size_t dim) {
  const std::size_t half = dim / 2;
  std::vector<double> e(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    e[i] = std::sin(1000.0 * t * freq);
    e[half + i] = std::cos(1000.0 * t * freq);
  }
  return e;
}

template <typename T>
void add_dit_parameters(ParameterSet<T>& p, const DiTConfig& cfg, std::mt19937_64& rng) {
  validate(cfg);
  const std::size_t d = cfg.model_dim, cw = cfg.cond_width;
  add_linear(p, "dit.in", 2 * cfg.latent_dim, d, rng);
  add_linear(p, "dit.position", 2 * conditioning::kPositionHarmonics, d, rng);
  add_linear(p, "dit.time1", cfg.time_embed_dim, cw, rng);
  add_linear(p, "dit.time2", cw, cw, rng);
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    add_norm(p, block_name(l, "ln1"), d, rng);
    add_linear(p, block_name(l, "mod"), cw, 6 * d, rng, Init::zeros);
    for (const char* m : {"self.q", "self.k", "self.v", "self.o"}) add_linear(p, block_name(l, m), d, d, rng);
    add_norm(p, block_name(l, "ln2"), d, rng);
    add_linear(p, block_name(l, "cross.q"), d, d, rng);
    add_linear(p, block_name(l, "cross.k"), cw, d, rng);
    add_linear(p, block_name(l, "cross.v"), cw, d, rng);
    add_linear(p, block_name(l, "cross.o"), d, d, rng);
    add_norm(p, block_name(l, "ln3"), d, rng);
    add_linear(p, block_name(l, "mlp1"), d, cfg.mlp_ratio * d, rng);
    add_linear(p, block_name(l, "mlp2"), cfg.mlp_ratio * d, d, rng);
  }
  add_norm(p, "dit.ln_out", d, rng);
  add_linear(p, "dit.mod_out", cw, 2 * d, rng, Init::zeros);
  add_linear(p, "dit.out", d, cfg.latent_dim, rng, Init::zeros);
  add_linear(p, "dit.gain", d, cfg.latent_dim, rng, Init::zeros);
}

template <typename T>
Tensor<T> dit_forward(Tape<T>& tape, const ParameterSet<T>& p, const DiTConfig& cfg, const Tensor<T>& xt, double t,
                      const Tensor<T>& lr, const conditioning::ConditioningBundle<T>& bundle, FrameWindow window) {
  if (xt.ndim() != 2 || xt.cols() != cfg.latent_dim) {
    throw DimensionError("xt " + numerics::shape_to_string(xt.shape()) + " expected [frames x " +
                         std::to_string(cfg.latent_dim) + "]");
  }
  if (lr.shape() != xt.shape()) {
    throw DimensionError("LR latent " + numerics::shape_to_string(lr.shape()) + " is not frame-aligned with xt " +
                         numerics::shape_to_string(xt.shape()));
  }
  const std::size_t frames = xt.rows();
  if (frames > cfg.max_frames) {
    throw DimensionError(std::to_string(frames) + " frames exceed max_frames " + std::to_string(cfg.max_frames));
  }
  if (bundle.tokens.cols() != cfg.cond_width || bundle.global.cols() != cfg.cond_width) {
    throw DimensionError("conditioning width does not match cond_width " + std::to_string(cfg.cond_width));
  }

  const Tensor<T> inputs[] = {xt, lr};
  auto h = lin(tape, p, "dit.in", tape.concat(inputs, 1));
  h = tape.add(h, positional_encoding<T>(frames, cfg.model_dim));
  const double total = static_cast<double>(std::max(window.total, window.offset + frames));
  std::vector<T> pf;
  pf.reserve(frames * 2 * conditioning::kPositionHarmonics);
  for (std::size_t f = 0; f < frames; ++f) {
    for (double v : conditioning::position_features((static_cast<double>(window.offset + f) + 0.5) / total)) {
      pf.push_back(static_cast<T>(v));
    }
  }
  h = tape.add(h, lin(tape, p, "dit.position",
                      Tensor<T>::from({frames, 2 * conditioning::kPositionHarmonics}, std::move(pf))));

  const auto te = timestep_embedding(t, cfg.time_embed_dim);
  const auto temb = Tensor<T>::from({1, te.size()}, std::vector<T>(te.begin(), te.end()));
  const auto tm = lin(tape, p, "dit.time2", tape.silu(lin(tape, p, "dit.time1", temb)));
  const auto c = tape.silu(tape.add(tm, bundle.global));

  const std::size_t d = cfg.model_dim;
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const auto mod = lin(tape, p, block_name(l, "mod"), c);
    const auto a = modulate(tape, norm(tape, p, block_name(l, "ln1"), h), mod, 0, d);
    h = tape.add(h, attention(tape, p, block_name(l, "self"), a, a, cfg.num_heads));
    const auto b = modulate(tape, norm(tape, p, block_name(l, "ln2"), h), mod, 2, d);
    h = tape.add(h, attention(tape, p, block_name(l, "cross"), b, bundle.tokens, cfg.num_heads));
    const auto m = modulate(tape, norm(tape, p, block_name(l, "ln3"), h), mod, 4, d);
    h = tape.add(h, lin(tape, p, block_name(l, "mlp2"), tape.silu(lin(tape, p, block_name(l, "mlp1"), m))));
  }
  const auto mod_out = lin(tape, p, "dit.mod_out", c);
  const auto o = modulate(tape, norm(tape, p, "dit.ln_out", h), mod_out, 0, d);
  return tape.add(lin(tape, p, "dit.out", o), tape.mul(lin(tape, p, "dit.gain", o), xt));
}

template void add_dit_parameters<float>(ParameterSet<float>&, const DiTConfig&, std::mt19937_64&);
template void add_dit_parameters<double>(ParameterSet<double>&, const DiTConfig&, std::mt19937_64&);
template Tensor<float> dit_forward<float>(Tape<float>&, const ParameterSet<float>&, const DiTConfig&,
                                          const Tensor<float>&, double, const Tensor<float>&,
                                          const conditioning::ConditioningBundle<float>&, FrameWindow);
template Tensor<double> dit_forward<double>(Tape<double>&, const ParameterSet<double>&, const DiTConfig&,
                                            const Tensor<double>&, double, const Tensor<double>&,
                                            const conditioning::ConditioningBundle<double>&, FrameWindow);

}  // namespace cogsr::flow
