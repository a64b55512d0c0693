#include "cogsr/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cogsr/conditioning/cache.hpp"
#include "cogsr/conditioning/oracle.hpp"
#include "cogsr/dsp/pitch.hpp"
#include "cogsr/eval/content.hpp"
#include "cogsr/harness/dataset.hpp"
#include "cogsr/util.hpp"

namespace cogsr::harness {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const char* const kEmotions[] = {"Neutral", "Calm", "Excited", "Anxious"};
const char* const kSplits[] = {"train", "val", "test"};

struct Speaker {
  std::string id;
  double f0_hz = 120.0;
  double vibrato_depth = 0.02;
  double vibrato_rate_hz = 5.0;
  std::vector<dsp::Formant> formants;
};

Speaker draw_speaker(const CorpusConfig& c, std::mt19937_64& rng, std::size_t index) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  Speaker s;
  char buf[16];
  std::snprintf(buf, sizeof buf, "spk%03zu", index);
  s.id = buf;
  s.f0_hz = u(c.f0_hz[0], c.f0_hz[1]);
  const double f2 = u(c.timbre_hz[0], c.timbre_hz[1]);
  s.formants = {{f2, 250.0, u(8.0, 12.0)}, {f2 * u(1.4, 1.75), 300.0, u(5.0, 9.0)}};
  s.vibrato_depth = u(0.01, 0.03);
  s.vibrato_rate_hz = u(4.0, 6.0);
  return s;
}

std::array<std::size_t, 3> split_counts(std::size_t n) {
  const std::size_t val = n / 20;
  const std::size_t test = n / 20;
  return {n - val - test, val, test};
}

void write_json_file(const fs::path& path, const Json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

conditioning::Vocabulary corpus_vocabulary(const RunConfig& c) {
  return conditioning::Vocabulary::build(conditioning::oracle_words(c.corpus.vocab_size));
}

conditioning::RecordFacts facts_for(const ManifestEntry& e, const dsp::DegradationSpec& d) {
  conditioning::RecordFacts f;
  f.f0_hz = e.f0_hz;
  f.emotion = e.emotion;
  f.tokens = e.content_tokens;
  f.cutoff_hz = d.cutoff_hz;
  f.snr_db = d.snr_db;
  if (std::isfinite(d.snr_db)) f.noise = d.noise_kind;
  f.sample_rate = kSampleRate;
  return f;
}

struct Utterance {
  ManifestEntry entry;
  dsp::Waveform audio;
};

std::vector<Utterance> load_split(const fs::path& manifest) {
  std::vector<Utterance> out;
  for (auto& e : read_manifest(manifest)) {
    auto w = dsp::read_wav(manifest.parent_path() / e.wav_path);
    if (w.sample_rate != kSampleRate) throw ValidationError(e.id + ": expected 16 kHz audio");
    out.push_back({std::move(e), std::move(w)});
  }
  if (out.empty()) throw ValidationError("manifest has no utterances: " + manifest.string());
  return out;
}

dsp::Waveform segment(const dsp::Waveform& w, std::size_t start, std::size_t len) {
  dsp::Waveform s;
  s.sample_rate = w.sample_rate;
  const std::size_t end = std::min(w.size(), start + len);
  s.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                   w.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return s;
}

flow::TrainItem make_item(const flow::ModelState<float>& model, const Utterance& u, std::size_t start,
                          std::size_t len, const dsp::DegradationSpec& d) {
  const std::size_t dim = model.config.dit.latent_dim;
  const auto hr = segment(u.audio, start, len);
  const auto lr = dsp::degrade(hr, d).audio;
  flow::TrainItem it;
  it.id = u.entry.id;
  it.x1 = dsp::mdct_encode(hr, dim);
  it.lr = dsp::mdct_encode(lr, dim);
  model.stats.normalize(it.x1);
  model.stats.normalize(it.lr);
  it.window = {start / dim, dsp::mdct_frame_count(u.audio.size(), dim)};
  const auto pitch = dsp::pitch_stats(dsp::track_pitch(lr));
  const auto record = conditioning::oracle_record(facts_for(u.entry, d));
  it.cond = flow::conditioning_inputs(model.config, model.vocab, record, d.cutoff_hz, kSampleRate, pitch);
  return it;
}

std::mt19937_64 step_rng(std::uint64_t seed, std::size_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  return std::mt19937_64(seq);
}

double mean_of_range(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  if (end <= begin) return 0.0;
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return s / static_cast<double>(end - begin);
}

// Rewrites the loss log keeping the header and entries up to `step`.
std::vector<std::string> truncated_log(const fs::path& path, std::size_t step, std::vector<double>& losses) {
  std::vector<std::string> kept;
  std::ifstream is(path);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = Json::parse(line);
    if (j.contains("step") && j.at("step").get<std::size_t>() > step) continue;
    if (j.contains("loss")) losses.push_back(j.at("loss").get<double>());
    kept.push_back(line);
  }
  return kept;
}

}  // namespace

double lr_scale(const TrainingConfig& t, std::size_t step) {
  if (step < t.warmup_steps) return static_cast<double>(step + 1) / static_cast<double>(t.warmup_steps);
  const std::size_t span = t.steps > t.warmup_steps ? t.steps - t.warmup_steps : 1;
  const double progress = std::min(1.0, static_cast<double>(step - t.warmup_steps) / static_cast<double>(span));
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return t.min_lr_fraction + (1.0 - t.min_lr_fraction) * cosine;
}

SynthDataSummary cmd_synth_data(const RunConfig& config, const fs::path& out_dir) {
  const auto& c = config.corpus;
  const std::string fp = fingerprint(config);
  fs::create_directories(out_dir / "wav");
  DataPaths paths{out_dir};
  std::mt19937_64 rng(c.seed);
  const auto counts = split_counts(c.count);

  std::set<std::pair<double, double>> identities;
  std::size_t speaker_index = 0;
  auto new_speaker = [&] {
    for (;;) {
      auto s = draw_speaker(c, rng, speaker_index);
      if (identities.insert({s.f0_hz, s.formants.front().center_hz}).second) {
        ++speaker_index;
        return s;
      }
    }
  };

  fs::remove(paths.cot_cache());
  conditioning::ConditioningCache cache(paths.cot_cache());
  std::vector<std::vector<double>> train_features;
  Json speakers_by_split;
  std::size_t utt_index = 0;
  for (std::size_t split = 0; split < 3; ++split) {
    std::vector<ManifestEntry> entries;
    Json split_speakers = Json::array();
    Speaker speaker;
    for (std::size_t k = 0; k < counts[split]; ++k) {
      if (k % c.utterances_per_speaker == 0) {
        speaker = new_speaker();
        split_speakers.push_back(speaker.id);
      }
      auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
      const auto n_tokens = std::uniform_int_distribution<std::size_t>(c.tokens_per_utterance[0],
                                                                       c.tokens_per_utterance[1])(rng);
      dsp::SyntheticUtteranceSpec spec;
      spec.f0_hz = speaker.f0_hz * u(0.97, 1.03);
      spec.vibrato_depth = speaker.vibrato_depth;
      spec.vibrato_rate_hz = speaker.vibrato_rate_hz;
      spec.formants = speaker.formants;
      for (std::size_t t = 0; t < n_tokens; ++t) {
        spec.content_tokens.push_back(std::uniform_int_distribution<int>(0, c.vocab_size - 1)(rng));
      }
      spec.duration_s = 0.08 + static_cast<double>(n_tokens) * u(c.slot_s[0], c.slot_s[1]);
      spec.rng_seed = rng();
      const std::string emotion = kEmotions[std::uniform_int_distribution<int>(0, 3)(rng)];
      const auto degradation = sample_degradation(config.degradation, rng);

      const auto utt = dsp::synth_utterance(spec, kSampleRate);
      char id[32];
      std::snprintf(id, sizeof id, "utt%05zu", utt_index++);
      ManifestEntry e;
      e.id = id;
      e.wav_path = "wav/" + e.id + ".wav";
      e.speaker = speaker.id;
      e.emotion = emotion;
      e.f0_hz = utt.labels.f0_hz;
      e.content_tokens = utt.labels.tokens;
      e.slot_boundaries_s = utt.labels.slots;
      e.degradation = degradation;
      dsp::write_wav(out_dir / e.wav_path, utt.audio);
      cache.put(e.id, conditioning::oracle_record(facts_for(e, degradation)));
      if (split == 0) train_features.push_back(eval::raw_speaker_features(dsp::read_wav(out_dir / e.wav_path)));
      entries.push_back(std::move(e));
    }
    write_manifest(paths.manifest(kSplits[split]), entries);
    speakers_by_split[kSplits[split]] = split_speakers;
  }
  cache.compact();
  save_speaker_stats(paths.speaker_stats(), eval::SpeakerEmbeddingStats::compute(train_features), fp);

  Json summary;
  summary["fingerprint"] = fp;
  summary["sample_rate"] = kSampleRate;
  summary["counts"] = {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}};
  summary["speakers"] = speakers_by_split;
  write_json_file(paths.summary(), summary);
  spdlog::info("synth-data: {} train / {} val / {} test utterances in {}", counts[0], counts[1], counts[2],
               out_dir.string());
  return {counts[0], counts[1], counts[2], fp};
}

TrainSummary cmd_train(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir, bool resume,
                       std::optional<std::size_t> stop_at) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string fp = fingerprint(config);
  const DataPaths paths{data_dir};
  const auto train = load_split(paths.manifest("train"));
  const auto val = load_split(paths.manifest("val"));
  fs::create_directories(out_dir);

  const auto& tc = config.training;
  const std::size_t dim = config.model.dit.latent_dim;
  const std::size_t crop = (config.model.dit.max_frames - 1) * dim;
  const auto vocab = corpus_vocabulary(config);

  const fs::path last = out_dir / "last.ckpt";
  const fs::path best = out_dir / "best.ckpt";
  const fs::path log_path = out_dir / "loss_log.jsonl";
  const bool resuming = resume && fs::exists(last);
  flow::ModelState<float> model;
  if (resuming) {
    model = flow::load_model<float>(last);
    if (model.fingerprint != fp) {
      throw ConfigError("cannot resume: " + last.string() + " was trained with config " + model.fingerprint +
                        ", current config is " + fp);
    }
  } else {
    std::vector<dsp::LatentSequence> latents;
    latents.reserve(train.size());
    for (const auto& u : train) latents.push_back(dsp::mdct_encode(u.audio, dim));
    numerics::AdamWConfig adam;
    adam.lr = tc.lr;
    adam.weight_decay = tc.weight_decay;
    model = flow::create_model<float>(config.model_config(vocab.size()), vocab,
                                      dsp::NormalizationStats::compute(latents), adam, tc.seed);
    model.fingerprint = fp;
  }

  std::vector<flow::TrainItem> val_items;
  for (const auto& u : val) val_items.push_back(make_item(model, u, 0, crop, u.entry.degradation));
  const std::uint64_t val_seed = tc.seed ^ 0x5a5a5a5aULL;

  std::vector<double> losses;
  std::vector<std::string> log_lines;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_step = 0;
  std::uint64_t order_hash = fnv1a64("data-order", tc.seed);
  if (resuming) {
    log_lines = truncated_log(log_path, model.step(), losses);
    for (const auto& line : log_lines) {
      const auto j = Json::parse(line);
      if (j.contains("val_loss") && j.at("val_loss").get<double>() < best_val) {
        best_val = j.at("val_loss").get<double>();
        best_step = j.at("step").get<std::size_t>();
      }
      if (j.contains("data_order")) order_hash = std::stoull(j.at("data_order").get<std::string>(), nullptr, 16);
    }
  } else {
    log_lines.push_back(Json{{"fingerprint", fp}}.dump());
  }
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path.string());
  for (const auto& line : log_lines) log << line << '\n';

  auto validate_and_checkpoint = [&](std::size_t step) {
    const double v = flow::evaluate_loss(model, std::span<const flow::TrainItem>(val_items), val_seed);
    log << Json{{"step", step}, {"val_loss", v}}.dump() << '\n';
    if (v < best_val) {
      best_val = v;
      best_step = step;
      flow::save_model(model, best);
    }
    spdlog::info("step {:>6}  val_loss {:.5f}  (best {:.5f} at {})", step, v, best_val, best_step);
  };

  std::vector<flow::TrainItem> batch;
  const std::size_t end = std::min(tc.steps, stop_at.value_or(tc.steps));
  for (std::size_t s = model.step(); s < end; ++s) {
    auto rng = step_rng(tc.seed, s);
    batch.clear();
    for (std::size_t b = 0; b < tc.batch; ++b) {
      const auto& u = train[std::uniform_int_distribution<std::size_t>(0, train.size() - 1)(rng)];
      const std::size_t hops = u.audio.size() > crop ? (u.audio.size() - crop) / dim : 0;
      const std::size_t start = dim * std::uniform_int_distribution<std::size_t>(0, hops)(rng);
      const auto d = sample_degradation(config.degradation, rng);
      order_hash = fnv1a64(u.entry.id + "@" + std::to_string(start) + "/" + format_double(d.cutoff_hz), order_hash);
      batch.push_back(make_item(model, u, start, crop, d));
    }
    const double scale = lr_scale(tc, s);
    const double loss = flow::train_step(model, std::span<const flow::TrainItem>(batch), {scale, tc.clip_norm});
    losses.push_back(loss);
    const std::size_t step = s + 1;
    log << Json{{"step", step}, {"loss", loss}, {"lr_scale", scale}, {"data_order", to_hex(order_hash)}}.dump()
        << '\n';
    if (step % tc.log_every == 0) {
      spdlog::info("step {:>6}  loss {:.5f}  lr x{:.3f}", step,
                   mean_of_range(losses, losses.size() - std::min<std::size_t>(tc.log_every, losses.size()),
                                 losses.size()),
                   scale);
    }
    if (step % tc.val_every == 0 || step == tc.steps) validate_and_checkpoint(step);
  }
  if (!log) throw IoError("failed writing " + log_path.string());
  flow::save_model(model, last);
  if (model.step() == tc.steps && !fs::exists(best)) flow::save_model(model, best);

  TrainSummary summary;
  summary.steps = model.step();
  const std::size_t window = std::min<std::size_t>(20, losses.size());
  summary.initial_loss = mean_of_range(losses, 0, window);
  summary.final_loss = mean_of_range(losses, losses.size() - window, losses.size());
  summary.best_val_loss = best_val;
  summary.best_step = best_step;
  summary.data_order_hash = to_hex(order_hash);
  summary.fingerprint = fp;
  Json j;
  j["fingerprint"] = fp;
  j["steps"] = summary.steps;
  j["initial_loss"] = summary.initial_loss;
  j["final_loss"] = summary.final_loss;
  j["best_val_loss"] = std::isfinite(best_val) ? Json(best_val) : Json(nullptr);
  j["best_step"] = best_step;
  j["data_order_hash"] = summary.data_order_hash;
  write_json_file(out_dir / "train_summary.json", j);
  spdlog::info("train: {} steps, loss {:.4f} -> {:.4f}, {:.1f} s", summary.steps, summary.initial_loss,
               summary.final_loss,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return summary;
}

flow::RestoreResult cmd_restore(const RestoreRequest& r) {
  conditioning::CoTRecord record;
  if (!r.cache.empty()) {
    const conditioning::ConditioningCache cache(r.cache);
    const auto hit = cache.get(r.cache_id);
    if (!hit) throw ConfigError("id '" + r.cache_id + "' not found in " + r.cache.string());
    record = hit->record;
  } else {
    record = conditioning::parse_cot(r.cot_text);
  }
  const auto model = flow::load_model<float>(r.checkpoint);
  const auto input = dsp::read_wav(r.in_wav);
  flow::RestoreOptions opt;
  opt.steps = r.steps;
  opt.seed = r.seed;
  opt.cutoff_hz = r.cutoff_hz;
  auto result = flow::restore(model, input, record, opt);
  dsp::write_wav(r.out_wav, result.audio);
  return result;
}

eval::MetricsReport cmd_evaluate(const RunConfig& config, const fs::path& checkpoint, const fs::path& manifest,
                                 const fs::path& out_prefix) {
  if (config.evaluation.conditions.empty()) throw ConfigError("evaluation.conditions is empty");
  const auto model = flow::load_model<float>(checkpoint);
  const auto items = load_eval_items(manifest);
  const auto stats = load_speaker_stats(manifest.parent_path() / "speaker_stats.json");
  const auto bank = eval::TemplateBank::build(config.corpus.vocab_size, kSampleRate);
  const eval::EvalContext ctx{bank, stats};
  auto options = config.eval_options();
  options.config_fingerprint = model.fingerprint;
  const auto report = eval::evaluate_corpus(model, items, config.evaluation.conditions, ctx, options);
  if (out_prefix.has_parent_path()) fs::create_directories(out_prefix.parent_path());
  auto json_path = out_prefix;
  json_path += ".json";
  auto text_path = out_prefix;
  text_path += ".txt";
  write_text_file(json_path, eval::report_json(report));
  write_text_file(text_path, eval::report_table(report));
  return report;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %14s %8s %8s\n", "Method", "content_error", "LSD", "SIM");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-28s %14.4f %8.4f %8.4f\n", r.name.c_str(), r.content_error, r.lsd, r.sim);
    os << line;
  }
  return os.str();
}

std::vector<AblationRow> cmd_ablate(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir) {
  if (config.evaluation.conditions.empty()) throw ConfigError("evaluation.conditions is empty");
  struct Variant {
    const char* name;
    const char* slug;
    AblationConfig flags;
  };
  const Variant variants[] = {
      {"Full", "full", {false, false, false}},
      {"w/o CoT", "no_cot", {true, false, false}},
      {"w/o CoT (Transcript Only)", "transcript_only", {false, true, false}},
      {"w/o Acoustic Priors", "no_priors", {false, false, true}},
  };
  std::vector<AblationRow> rows;
  Json runs = Json::array();
  for (const auto& v : variants) {
    RunConfig c = config;
    c.ablation = v.flags;
    const fs::path dir = out_dir / v.slug;
    spdlog::info("ablate: training '{}' in {}", v.name, dir.string());
    const auto summary = cmd_train(c, data_dir, dir);
    const auto report = cmd_evaluate(c, dir / "last.ckpt", DataPaths{data_dir}.manifest("test"), dir / "report");
    const auto& m = report.conditions.front().means;
    rows.push_back({v.name, v.slug, m.content_error_rate, m.lsd, m.sim, summary.data_order_hash});
    runs.push_back({{"name", v.name},
                    {"run_dir", v.slug},
                    {"fingerprint", summary.fingerprint},
                    {"data_order_hash", summary.data_order_hash},
                    {"content_error", m.content_error_rate},
                    {"lsd", m.lsd},
                    {"sim", m.sim}});
  }
  for (const auto& r : rows) {
    if (r.data_order_hash != rows.front().data_order_hash) {
      throw RuntimeFailure("ablation runs saw different data: " + r.slug + " has order " + r.data_order_hash +
                           ", full has " + rows.front().data_order_hash);
    }
  }
  const auto& cond = config.evaluation.conditions.front();
  Json j;
  j["fingerprint"] = fingerprint(config);
  j["condition"] = {{"cutoff_hz", cond.cutoff_hz},
                    {"snr_db", std::isfinite(cond.snr_db) ? Json(cond.snr_db) : Json(nullptr)},
                    {"noise", dsp::to_string(cond.noise)}};
  j["rows"] = runs;
  write_json_file(out_dir / "ablation.json", j);
  write_text_file(out_dir / "ablation.txt", ablation_table(rows));
  return rows;
}

}  // namespace cogsr::harness
