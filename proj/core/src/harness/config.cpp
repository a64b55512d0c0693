#include "cogsr/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cogsr/dsp/fft.hpp"
#include "cogsr/util.hpp"

namespace cogsr::harness {

using Json = nlohmann::ordered_json;

namespace {

// Object reader that remembers which keys were read so leftovers can be reported.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError("missing required key " + where(key));
    return *it;
  }

  template <typename T>
  T get(const std::string& key) {
    const Json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("key " + where(key) + " has the wrong type");
    }
  }

  template <typename T>
  std::array<T, 2> range(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 2) throw ConfigError("key " + where(key) + " must be a [low, high] pair");
    std::array<T, 2> out{};
    for (std::size_t i = 0; i < 2; ++i) {
      const bool ok = std::is_integral_v<T> ? v[i].is_number_unsigned() : v[i].is_number();
      if (!ok) throw ConfigError("key " + where(key) + " has the wrong element type");
      out[i] = v[i].get<T>();
    }
    if (out[0] > out[1]) throw ConfigError("key " + where(key) + " has low > high");
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), where(key)); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError("unknown key " + where(k));
    }
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

dsp::NoiseKind noise_from(const std::string& s, const std::string& where) {
  try {
    return dsp::noise_kind_from_string(s);
  } catch (const Error&) {
    throw ConfigError("unknown noise kind '" + s + "' at " + where);
  }
}

Json range_json(const auto& r) { return Json::array({r[0], r[1]}); }

}  // namespace

flow::ModelConfig RunConfig::model_config(std::size_t vocab_size) const {
  flow::ModelConfig m;
  m.dit = model.dit;
  m.cond.vocab_size = vocab_size;
  m.cond.fourier_k = model.fourier_k;
  m.cond.cond_width = model.dit.cond_width;
  m.cond.pitch_dim = model.pitch_dim;
  m.semantic_mode = ablation.disable_cot       ? conditioning::SemanticMode::disabled
                    : ablation.transcript_only ? conditioning::SemanticMode::transcript_only
                                               : conditioning::SemanticMode::full;
  m.use_priors = !ablation.disable_acoustic_priors;
  return m;
}

eval::EvalOptions RunConfig::eval_options() const {
  eval::EvalOptions o;
  o.steps = evaluation.steps;
  o.seed = evaluation.seed;
  o.cutoff_hint = evaluation.cutoff_hint;
  o.lsd.fft_len = evaluation.lsd_fft_len;
  o.lsd.hop = evaluation.lsd_hop;
  o.config_fingerprint = fingerprint(*this);
  return o;
}

RunConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");

  auto cs = root.child("corpus");
  c.corpus.count = cs.get<std::size_t>("count");
  c.corpus.utterances_per_speaker = cs.get<std::size_t>("utterances_per_speaker");
  c.corpus.f0_hz = cs.range<double>("f0_hz");
  c.corpus.timbre_hz = cs.range<double>("timbre_hz");
  c.corpus.tokens_per_utterance = cs.range<std::size_t>("tokens_per_utterance");
  c.corpus.slot_s = cs.range<double>("slot_s");
  c.corpus.vocab_size = cs.get<int>("vocab_size");
  c.corpus.seed = cs.get<std::uint64_t>("seed");
  cs.finish();

  auto ds = root.child("degradation");
  c.degradation.cutoff_hz = ds.range<double>("cutoff_hz");
  c.degradation.cutoff_grid_hz = ds.get<double>("cutoff_grid_hz");
  c.degradation.snr_db = ds.range<double>("snr_db");
  c.degradation.clean_fraction = ds.get<double>("clean_fraction");
  const auto& kinds = ds.raw("noise_kinds");
  if (!kinds.is_array() || kinds.empty()) throw ConfigError("degradation.noise_kinds must be a non-empty list");
  c.degradation.noise_kinds.clear();
  for (const auto& k : kinds) {
    if (!k.is_string()) throw ConfigError("degradation.noise_kinds entries must be strings");
    c.degradation.noise_kinds.push_back(noise_from(k.get<std::string>(), "degradation.noise_kinds"));
  }
  ds.finish();

  auto ms = root.child("model");
  auto& d = c.model.dit;
  d.depth = ms.get<std::size_t>("depth");
  d.model_dim = ms.get<std::size_t>("model_dim");
  d.num_heads = ms.get<std::size_t>("num_heads");
  d.latent_dim = ms.get<std::size_t>("latent_dim");
  d.max_frames = ms.get<std::size_t>("max_frames");
  d.cond_width = ms.get<std::size_t>("cond_width");
  d.mlp_ratio = ms.get<std::size_t>("mlp_ratio");
  d.time_embed_dim = ms.get<std::size_t>("time_embed_dim");
  c.model.fourier_k = ms.get<std::size_t>("fourier_k");
  c.model.pitch_dim = ms.get<std::size_t>("pitch_dim");
  d.seed = ms.get<std::uint64_t>("seed");
  ms.finish();

  auto ts = root.child("training");
  c.training.steps = ts.get<std::size_t>("steps");
  c.training.batch = ts.get<std::size_t>("batch");
  c.training.lr = ts.get<double>("lr");
  c.training.weight_decay = ts.get<double>("weight_decay");
  c.training.warmup_steps = ts.get<std::size_t>("warmup_steps");
  c.training.min_lr_fraction = ts.get<double>("min_lr_fraction");
  c.training.clip_norm = ts.get<double>("clip_norm");
  c.training.val_every = ts.get<std::size_t>("val_every");
  c.training.log_every = ts.get<std::size_t>("log_every");
  c.training.seed = ts.get<std::uint64_t>("seed");
  ts.finish();

  auto es = root.child("evaluation");
  const auto& conds = es.raw("conditions");
  if (!conds.is_array()) throw ConfigError("evaluation.conditions must be a list");
  for (std::size_t i = 0; i < conds.size(); ++i) {
    Section cond(conds[i], "evaluation.conditions[" + std::to_string(i) + "]");
    eval::EvalCondition ec;
    ec.cutoff_hz = cond.get<double>("cutoff_hz");
    const auto& snr = cond.raw("snr_db");
    if (snr.is_null()) {
      ec.snr_db = dsp::kNoNoise;
    } else if (snr.is_number()) {
      ec.snr_db = snr.get<double>();
    } else {
      throw ConfigError("key " + cond.where("snr_db") + " must be a number or null");
    }
    ec.noise = noise_from(cond.get<std::string>("noise"), cond.where("noise"));
    cond.finish();
    c.evaluation.conditions.push_back(ec);
  }
  c.evaluation.steps = es.get<std::size_t>("steps");
  c.evaluation.seed = es.get<std::uint64_t>("seed");
  c.evaluation.cutoff_hint = es.get<bool>("cutoff_hint");
  c.evaluation.lsd_fft_len = es.get<std::size_t>("lsd_fft_len");
  c.evaluation.lsd_hop = es.get<std::size_t>("lsd_hop");
  es.finish();

  auto as = root.child("ablation");
  c.ablation.disable_cot = as.get<bool>("disable_cot");
  c.ablation.transcript_only = as.get<bool>("transcript_only");
  c.ablation.disable_acoustic_priors = as.get<bool>("disable_acoustic_priors");
  as.finish();

  root.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  const auto& k = c.corpus;
  require(k.count >= 20, "corpus.count must be at least 20");
  require(k.utterances_per_speaker >= 1, "corpus.utterances_per_speaker must be positive");
  require(k.f0_hz[0] >= 60.0 && k.f0_hz[1] <= 500.0, "corpus.f0_hz must lie in [60, 500]");
  require(k.timbre_hz[0] > 1000.0 && k.timbre_hz[1] * 1.75 < 4000.0,
          "corpus.timbre_hz must keep both timbre formants inside (1000, 4000) Hz");
  require(k.tokens_per_utterance[0] >= 1, "corpus.tokens_per_utterance must be positive");
  require(k.slot_s[0] >= 0.15, "corpus.slot_s must be at least 0.15 s");
  require(k.vocab_size >= 2 && k.vocab_size <= dsp::kMaxTokens,
          "corpus.vocab_size must be in [2, " + std::to_string(dsp::kMaxTokens) + "]");

  const auto& d = c.degradation;
  require(d.cutoff_grid_hz > 0.0, "degradation.cutoff_grid_hz must be positive");
  require(d.cutoff_hz[0] > 0.0 && d.cutoff_hz[1] < 8000.0, "degradation.cutoff_hz must lie inside (0, 8000)");
  require(d.clean_fraction >= 0.0 && d.clean_fraction <= 1.0, "degradation.clean_fraction must be in [0, 1]");

  try {
    flow::validate(c.model.dit);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  require(c.model.fourier_k >= 2 && c.model.pitch_dim >= 1, "model.fourier_k >= 2 and model.pitch_dim >= 1 required");

  const auto& t = c.training;
  require(t.batch >= 1, "training.batch must be positive");
  require(t.lr > 0.0, "training.lr must be positive");
  require(t.min_lr_fraction >= 0.0 && t.min_lr_fraction <= 1.0, "training.min_lr_fraction must be in [0, 1]");
  require(t.clip_norm >= 0.0 && t.weight_decay >= 0.0, "training.clip_norm and weight_decay must be non-negative");
  require(t.val_every >= 1 && t.log_every >= 1, "training.val_every and log_every must be positive");

  const auto& e = c.evaluation;
  require(e.steps >= 1, "evaluation.steps must be positive");
  require(e.lsd_fft_len >= 2 && dsp::is_power_of_two(e.lsd_fft_len) && e.lsd_hop >= 1,
          "evaluation.lsd_fft_len must be a power of two and lsd_hop positive");
  for (const auto& cond : e.conditions) {
    require(cond.cutoff_hz > 0.0 && cond.cutoff_hz < 8000.0, "evaluation condition cutoff must lie inside (0, 8000)");
  }
  require(!(c.ablation.disable_cot && c.ablation.transcript_only),
          "ablation.disable_cot and ablation.transcript_only are mutually exclusive");
}

std::string canonical_json(const RunConfig& c) {
  Json j;
  const auto& k = c.corpus;
  j["corpus"] = {{"count", k.count},
                 {"utterances_per_speaker", k.utterances_per_speaker},
                 {"f0_hz", range_json(k.f0_hz)},
                 {"timbre_hz", range_json(k.timbre_hz)},
                 {"tokens_per_utterance", range_json(k.tokens_per_utterance)},
                 {"slot_s", range_json(k.slot_s)},
                 {"vocab_size", k.vocab_size},
                 {"seed", k.seed}};
  const auto& d = c.degradation;
  Json kinds = Json::array();
  for (auto n : d.noise_kinds) kinds.push_back(dsp::to_string(n));
  j["degradation"] = {{"cutoff_hz", range_json(d.cutoff_hz)},
                      {"cutoff_grid_hz", d.cutoff_grid_hz},
                      {"snr_db", range_json(d.snr_db)},
                      {"clean_fraction", d.clean_fraction},
                      {"noise_kinds", kinds}};
  const auto& m = c.model.dit;
  j["model"] = {{"depth", m.depth},           {"model_dim", m.model_dim},         {"num_heads", m.num_heads},
                {"latent_dim", m.latent_dim}, {"max_frames", m.max_frames},       {"cond_width", m.cond_width},
                {"mlp_ratio", m.mlp_ratio},   {"time_embed_dim", m.time_embed_dim}, {"fourier_k", c.model.fourier_k},
                {"pitch_dim", c.model.pitch_dim}, {"seed", m.seed}};
  const auto& t = c.training;
  j["training"] = {{"steps", t.steps},
                   {"batch", t.batch},
                   {"lr", t.lr},
                   {"weight_decay", t.weight_decay},
                   {"warmup_steps", t.warmup_steps},
                   {"min_lr_fraction", t.min_lr_fraction},
                   {"clip_norm", t.clip_norm},
                   {"val_every", t.val_every},
                   {"log_every", t.log_every},
                   {"seed", t.seed}};
  Json conds = Json::array();
  for (const auto& e : c.evaluation.conditions) {
    conds.push_back({{"cutoff_hz", e.cutoff_hz},
                     {"snr_db", std::isfinite(e.snr_db) ? Json(e.snr_db) : Json(nullptr)},
                     {"noise", dsp::to_string(e.noise)}});
  }
  const auto& e = c.evaluation;
  j["evaluation"] = {{"conditions", conds},
                     {"steps", e.steps},
                     {"seed", e.seed},
                     {"cutoff_hint", e.cutoff_hint},
                     {"lsd_fft_len", e.lsd_fft_len},
                     {"lsd_hop", e.lsd_hop}};
  j["ablation"] = {{"disable_cot", c.ablation.disable_cot},
                   {"transcript_only", c.ablation.transcript_only},
                   {"disable_acoustic_priors", c.ablation.disable_acoustic_priors}};
  return j.dump(2) + "\n";
}

std::string fingerprint(const RunConfig& c) { return to_hex(fnv1a64(canonical_json(c))); }

}  // namespace cogsr::harness
