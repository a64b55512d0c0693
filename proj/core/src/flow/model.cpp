#include "cogsr/flow/model.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cogsr/dsp/bandwidth.hpp"
#include "cogsr/error.hpp"
#include "cogsr/flow/rectified_flow.hpp"
#include "cogsr/numerics/checkpoint.hpp"

namespace cogsr::flow {

using numerics::Recording;
using numerics::Tape;
using numerics::Tensor;
using Json = nlohmann::ordered_json;

namespace {

const char* mode_name(conditioning::SemanticMode m) {
  switch (m) {
    case conditioning::SemanticMode::full: return "full";
    case conditioning::SemanticMode::transcript_only: return "transcript_only";
    case conditioning::SemanticMode::disabled: return "disabled";
  }
  return "full";
}

conditioning::SemanticMode mode_from(const std::string& s) {
  if (s == "full") return conditioning::SemanticMode::full;
  if (s == "transcript_only") return conditioning::SemanticMode::transcript_only;
  if (s == "disabled") return conditioning::SemanticMode::disabled;
  throw ValidationError("unknown semantic mode '" + s + "'");
}

template <typename T>
Tensor<T> from_values(std::size_t rows, std::size_t cols, std::span<const double> v) {
  return Tensor<T>::from({rows, cols}, std::vector<T>(v.begin(), v.end()));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

template <typename T>
ModelState<T> create_model(ModelConfig config, conditioning::Vocabulary vocab, dsp::NormalizationStats stats,
                           numerics::AdamWConfig adam, std::uint64_t train_seed) {
  validate(config.dit);
  config.cond.vocab_size = vocab.size();
  if (config.cond.cond_width != config.dit.cond_width) {
    throw ValidationError("conditioning width " + std::to_string(config.cond.cond_width) +
                          " differs from the DiT cond_width " + std::to_string(config.dit.cond_width));
  }
  if (stats.mean.size() != config.dit.latent_dim) {
    throw ValidationError("normalization stats have " + std::to_string(stats.mean.size()) + " dims, latent_dim is " +
                          std::to_string(config.dit.latent_dim));
  }
  ModelState<T> s;
  s.config = config;
  s.vocab = std::move(vocab);
  s.stats = std::move(stats);
  std::mt19937_64 init(config.dit.seed);
  conditioning::add_conditioning_parameters(s.params, s.config.cond, init);
  add_dit_parameters(s.params, s.config.dit, init);
  s.optimizer = numerics::AdamW<T>(adam);
  s.seed = train_seed;
  s.rng.seed(train_seed);
  return s;
}

conditioning::ConditioningInputs conditioning_inputs(const ModelConfig& config, const conditioning::Vocabulary& vocab,
                                                     const conditioning::CoTRecord& record, double cutoff_hz,
                                                     int sample_rate, const dsp::PitchStats& pitch) {
  conditioning::ConditioningInputs in;
  in.semantic_ids = conditioning::semantic_token_ids(record, vocab, config.semantic_mode);
  in.cutoff_hz = cutoff_hz;
  in.sample_rate = sample_rate;
  in.pitch = pitch;
  in.use_priors = config.use_priors;
  return in;
}

template <typename T>
Tensor<T> to_tensor(const dsp::LatentSequence& l) {
  return from_values<T>(l.frames, l.dim, l.values);
}

namespace {

template <typename T>
Tensor<T> item_loss(Tape<T>& tape, const ModelState<T>& state, const TrainItem& item, const FlowSample& fs) {
  const auto& cfg = state.config;
  if (item.lr.frames != item.x1.frames || item.lr.dim != item.x1.dim) {
    throw DimensionError("item " + item.id + ": LR latent is not frame-aligned with the HR latent");
  }
  const auto bundle = conditioning::build_conditioning(tape, state.params, cfg.cond, item.cond);
  const auto xt = from_values<T>(item.x1.frames, item.x1.dim, fs.xt);
  const auto target = from_values<T>(item.x1.frames, item.x1.dim, fs.target);
  const auto pred = dit_forward(tape, state.params, cfg.dit, xt, fs.t, to_tensor<T>(item.lr), bundle, item.window);
  return tape.mse(pred, target);
}

}  // namespace

template <typename T>
double train_step(ModelState<T>& state, std::span<const TrainItem> batch, const StepOptions& options) {
  if (batch.empty()) throw ValidationError("train_step needs a non-empty batch");
  for (auto& [name, p] : state.params.entries()) p.set_requires_grad(true);
  state.params.zero_grad();
  const T weight = T(1) / static_cast<T>(batch.size());
  double total = 0.0;
  for (const auto& item : batch) {
    const FlowSample fs = make_flow_sample(item.x1.values, state.rng);
    Tape<T> tape;
    const auto loss = item_loss(tape, state, item, fs);
    const double value = static_cast<double>(loss.item());
    if (!std::isfinite(value)) {
      std::string ids;
      for (const auto& b : batch) ids += (ids.empty() ? "" : ",") + b.id;
      throw RuntimeFailure("non-finite loss at step " + std::to_string(state.step() + 1) + " (seed " +
                           std::to_string(state.seed) + ", items " + ids + ")");
    }
    total += value;
    tape.backward(loss, weight);
  }
  if (options.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, p] : state.params.entries()) {
      for (T g : p.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
      throw RuntimeFailure("non-finite gradient norm at step " + std::to_string(state.step() + 1) + " (seed " +
                           std::to_string(state.seed) + ")");
    }
    if (norm > options.clip_norm) {
      const T s = static_cast<T>(options.clip_norm / norm);
      for (auto& [name, p] : state.params.entries()) {
        for (T& g : p.grad()) g *= s;
      }
    }
  }
  state.optimizer.step(state.params, options.lr_scale);
  return total / static_cast<double>(batch.size());
}

template <typename T>
double evaluate_loss(const ModelState<T>& state, std::span<const TrainItem> items, std::uint64_t seed) {
  if (items.empty()) throw ValidationError("evaluate_loss needs at least one item");
  std::mt19937_64 rng(seed);
  double total = 0.0;
  for (const auto& item : items) {
    const FlowSample fs = make_flow_sample(item.x1.values, rng);
    Tape<T> tape(Recording::off);
    total += static_cast<double>(item_loss(tape, state, item, fs).item());
  }
  return total / static_cast<double>(items.size());
}

template <typename T>
dsp::LatentSequence euler_sample(const ModelState<T>& state, const dsp::LatentSequence& x0,
                                 const dsp::LatentSequence& lr, const conditioning::ConditioningInputs& cond,
                                 std::size_t steps) {
  const auto& cfg = state.config;
  if (x0.frames != lr.frames || x0.dim != lr.dim || x0.dim != cfg.dit.latent_dim) {
    throw DimensionError("x0 and LR latent must share frames and latent_dim");
  }
  Tape<T> cond_tape(Recording::off);
  const auto bundle = conditioning::build_conditioning(cond_tape, state.params, cfg.cond, cond);
  dsp::LatentSequence out = x0;
  const std::size_t dim = x0.dim;
  for (std::size_t start = 0; start < x0.frames; start += cfg.dit.max_frames) {
    const std::size_t n = std::min(cfg.dit.max_frames, x0.frames - start);
    const std::span<const double> lr_span(lr.values.data() + start * dim, n * dim);
    const auto lr_t = from_values<T>(n, dim, lr_span);
    std::vector<double> x(x0.values.begin() + static_cast<std::ptrdiff_t>(start * dim),
                          x0.values.begin() + static_cast<std::ptrdiff_t>((start + n) * dim));
    x = euler_integrate(std::move(x), steps, [&](const std::vector<double>& cur, double t) {
      Tape<T> tape(Recording::off);
      const auto v = dit_forward(tape, state.params, cfg.dit, from_values<T>(n, dim, cur), t, lr_t, bundle, {start, x0.frames});
      return std::vector<double>(v.values().begin(), v.values().end());
    });
    std::copy(x.begin(), x.end(), out.values.begin() + static_cast<std::ptrdiff_t>(start * dim));
  }
  return out;
}

template <typename T>
RestoreResult restore(const ModelState<T>& state, const dsp::Waveform& lr, const conditioning::CoTRecord& record,
                      const RestoreOptions& options) {
  RestoreResult r;
  auto t0 = std::chrono::steady_clock::now();
  auto lr_latent = dsp::mdct_encode(lr, state.config.dit.latent_dim);
  state.stats.normalize(lr_latent);
  r.timings.encode_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.cutoff_hz = options.cutoff_hz ? *options.cutoff_hz : dsp::estimate_bandwidth(lr);
  r.pitch = dsp::pitch_stats(dsp::track_pitch(lr));
  const auto cond = conditioning_inputs(state.config, state.vocab, record, r.cutoff_hz, lr.sample_rate, r.pitch);
  r.timings.condition_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  dsp::LatentSequence x0 = lr_latent;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : x0.values) v = gauss(rng);
  auto x1 = euler_sample(state, x0, lr_latent, cond, options.steps);
  r.timings.sample_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  state.stats.denormalize(x1);
  r.audio = dsp::mdct_decode(x1);
  r.timings.decode_s = seconds_since(t0);
  return r;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".json";
  return p;
}

template <typename T>
void save_model(const ModelState<T>& state, const std::filesystem::path& path) {
  numerics::NamedTensors<T> entries = state.params.entries();
  const auto& opt = state.optimizer.state();
  for (std::size_t i = 0; i < opt.slots.size(); ++i) {
    const auto& [name, p] = state.params.entries()[i];
    entries.emplace_back("adam.m/" + name, Tensor<T>::from(p.shape(), opt.slots[i].m));
    entries.emplace_back("adam.v/" + name, Tensor<T>::from(p.shape(), opt.slots[i].v));
  }
  numerics::save_checkpoint(path, entries, state.seed);

  const auto& c = state.config;
  Json j;
  j["format"] = "cogsr-model";
  j["precision_bits"] = sizeof(T) * 8;
  j["fingerprint"] = state.fingerprint;
  j["dit"] = {{"depth", c.dit.depth},           {"model_dim", c.dit.model_dim},
              {"num_heads", c.dit.num_heads},   {"latent_dim", c.dit.latent_dim},
              {"max_frames", c.dit.max_frames}, {"cond_width", c.dit.cond_width},
              {"mlp_ratio", c.dit.mlp_ratio},   {"time_embed_dim", c.dit.time_embed_dim},
              {"seed", c.dit.seed}};
  j["conditioning"] = {{"vocab_size", c.cond.vocab_size},
                       {"fourier_k", c.cond.fourier_k},
                       {"cond_width", c.cond.cond_width},
                       {"pitch_dim", c.cond.pitch_dim},
                       {"semantic_mode", mode_name(c.semantic_mode)},
                       {"use_priors", c.use_priors}};
  j["vocabulary"] = state.vocab.words();
  j["normalization"] = {{"id", state.stats.id}, {"mean", state.stats.mean}, {"std", state.stats.std}};
  j["adamw"] = {{"lr", opt.config.lr},
                {"beta1", opt.config.beta1},
                {"beta2", opt.config.beta2},
                {"epsilon", opt.config.epsilon},
                {"weight_decay", opt.config.weight_decay}};
  j["seed"] = state.seed;
  j["step"] = opt.step;
  std::ostringstream rng;
  rng << state.rng;
  j["rng_state"] = rng.str();
  const auto side = sidecar_path(path);
  std::ofstream os(side, std::ios::trunc);
  if (!os) throw IoError("cannot write model sidecar: " + side.string());
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing model sidecar: " + side.string());
}

template <typename T>
ModelState<T> load_model(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  std::ifstream is(side);
  if (!is) throw IoError("cannot open model sidecar: " + side.string());
  Json j;
  try {
    j = Json::parse(is);
    if (j.at("format") != "cogsr-model") throw ValidationError("not a model sidecar: " + side.string());
    ModelConfig c;
    const auto& d = j.at("dit");
    c.dit = {d.at("depth"), d.at("model_dim"),  d.at("num_heads"),      d.at("latent_dim"), d.at("max_frames"),
             d.at("cond_width"), d.at("mlp_ratio"), d.at("time_embed_dim"), d.at("seed")};
    const auto& cc = j.at("conditioning");
    c.cond = {cc.at("vocab_size"), cc.at("fourier_k"), cc.at("cond_width"), cc.at("pitch_dim")};
    c.semantic_mode = mode_from(cc.at("semantic_mode"));
    c.use_priors = cc.at("use_priors");
    auto vocab = conditioning::Vocabulary::from_words(j.at("vocabulary").get<std::vector<std::string>>());
    const auto& n = j.at("normalization");
    auto stats = dsp::NormalizationStats::from_moments(n.at("mean").get<std::vector<double>>(),
                                                       n.at("std").get<std::vector<double>>());
    if (stats.id != n.at("id").get<std::string>()) throw ValidationError("normalization stats id mismatch in " + side.string());
    const auto& a = j.at("adamw");
    numerics::AdamWConfig adam{a.at("lr"), a.at("beta1"), a.at("beta2"), a.at("epsilon"), a.at("weight_decay")};

    auto state = create_model<T>(c, std::move(vocab), std::move(stats), adam, j.at("seed").get<std::uint64_t>());
    if (state.config.cond.vocab_size != c.cond.vocab_size) throw ValidationError("vocabulary size mismatch in " + side.string());
    state.fingerprint = j.at("fingerprint").get<std::string>();
    std::istringstream rs(j.at("rng_state").get<std::string>());
    rs >> state.rng;
    if (!rs) throw ValidationError("bad rng state in " + side.string());

    const auto ck = numerics::load_checkpoint<T>(path);
    for (auto& [name, p] : state.params.entries()) {
      const auto stored = ck.get(name);
      if (stored.shape() != p.shape()) {
        throw ValidationError("checkpoint tensor " + name + " has shape " + numerics::shape_to_string(stored.shape()) +
                              ", model expects " + numerics::shape_to_string(p.shape()));
      }
      p.values() = stored.values();
    }
    auto& opt = state.optimizer.state();
    opt.step = j.at("step").get<std::uint64_t>();
    if (opt.step > 0) {
      for (const auto& [name, p] : state.params.entries()) {
        opt.slots.push_back({ck.get("adam.m/" + name).values(), ck.get("adam.v/" + name).values()});
      }
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model sidecar " + side.string() + ": " + e.what());
  }
}

#define COGSR_INSTANTIATE(T)                                                                                     \
  template ModelState<T> create_model<T>(ModelConfig, conditioning::Vocabulary, dsp::NormalizationStats,       \
                                         numerics::AdamWConfig, std::uint64_t);                                \
  template Tensor<T> to_tensor<T>(const dsp::LatentSequence&);                                                  \
  template double train_step<T>(ModelState<T>&, std::span<const TrainItem>, const StepOptions&);                \
  template double evaluate_loss<T>(const ModelState<T>&, std::span<const TrainItem>, std::uint64_t);            \
  template dsp::LatentSequence euler_sample<T>(const ModelState<T>&, const dsp::LatentSequence&,                \
                                               const dsp::LatentSequence&, const conditioning::ConditioningInputs&, \
                                               std::size_t);                                                    \
  template RestoreResult restore<T>(const ModelState<T>&, const dsp::Waveform&, const conditioning::CoTRecord&, \
                                    const RestoreOptions&);                                                     \
  template void save_model<T>(const ModelState<T>&, const std::filesystem::path&);                              \
  template ModelState<T> load_model<T>(const std::filesystem::path&);
COGSR_INSTANTIATE(float)
COGSR_INSTANTIATE(double)
#undef COGSR_INSTANTIATE

}  // namespace cogsr::flow
