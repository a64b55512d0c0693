#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "cogsr/conditioning/cache.hpp"
#include "cogsr/conditioning/oracle.hpp"
#include "cogsr/harness/commands.hpp"
#include "cogsr/harness/config.hpp"
#include "cogsr/harness/dataset.hpp"

namespace {

using namespace cogsr;
using namespace cogsr::harness;
namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cogsr_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

RunConfig tiny_config() {
  RunConfig c;
  c.corpus.count = 40;
  c.corpus.utterances_per_speaker = 4;
  c.model.dit.depth = 1;
  c.model.dit.model_dim = 16;
  c.model.dit.num_heads = 2;
  c.model.dit.latent_dim = 32;
  c.model.dit.max_frames = 16;
  c.model.dit.cond_width = 16;
  c.model.dit.mlp_ratio = 2;
  c.model.dit.time_embed_dim = 16;
  c.model.fourier_k = 4;
  c.model.pitch_dim = 8;
  c.training.steps = 12;
  c.training.batch = 2;
  c.training.warmup_steps = 2;
  c.training.val_every = 5;
  c.training.log_every = 5;
  c.evaluation.conditions = {eval::EvalCondition{2000.0, dsp::kNoNoise, dsp::NoiseKind::pink}};
  c.evaluation.steps = 2;
  return c;
}

std::string read_smoke_config() { return slurp(fs::path(COGSR_SOURCE_DIR) / "configs" / "smoke.json"); }

Json mutable_config() { return Json::parse(read_smoke_config()); }

// Config

TEST(Config, ShippedSmokeConfigIsValid) {
  const auto c = parse_config(read_smoke_config());
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.corpus.count, 200u);
  EXPECT_EQ(c.training.steps, 2000u);
  EXPECT_FALSE(c.evaluation.conditions.empty());
}

TEST(Config, CanonicalRoundTrip) {
  const auto c = parse_config(read_smoke_config());
  const auto text = canonical_json(c);
  EXPECT_EQ(canonical_json(parse_config(text)), text);
  EXPECT_EQ(fingerprint(parse_config(text)), fingerprint(c));
}

TEST(Config, UnknownKeyIsRejectedWithPath) {
  auto j = mutable_config();
  j["training"]["momentum"] = 0.9;
  try {
    parse_config(j.dump());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("training.momentum"), std::string::npos) << e.what();
  }
  auto top = mutable_config();
  top["extra"] = 1;
  EXPECT_THROW(parse_config(top.dump()), ConfigError);
}

TEST(Config, MissingKeyIsRejectedWithPath) {
  auto j = mutable_config();
  j["corpus"].erase("seed");
  try {
    parse_config(j.dump());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("corpus.seed"), std::string::npos) << e.what();
  }
}

TEST(Config, WrongTypesAndMalformedJson) {
  auto j = mutable_config();
  j["training"]["steps"] = "many";
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  EXPECT_THROW(parse_config("{\"corpus\": "), ConfigError);
}

TEST(Config, FingerprintTracksEverySection) {
  const auto base = parse_config(read_smoke_config());
  std::set<std::string> prints{fingerprint(base)};
  auto c = base;
  c.corpus.seed += 1;
  prints.insert(fingerprint(c));
  c = base;
  c.training.lr *= 2;
  prints.insert(fingerprint(c));
  c = base;
  c.ablation.disable_cot = true;
  prints.insert(fingerprint(c));
  c = base;
  c.evaluation.conditions.pop_back();
  prints.insert(fingerprint(c));
  EXPECT_EQ(prints.size(), 5u);
}

TEST(Config, ValidationRejectsInconsistentValues) {
  auto c = parse_config(read_smoke_config());
  c.training.batch = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = parse_config(read_smoke_config());
  c.ablation.disable_cot = c.ablation.transcript_only = true;
  EXPECT_THROW(validate(c), ConfigError);
  c = parse_config(read_smoke_config());
  c.model.dit.num_heads = 3;
  EXPECT_THROW(validate(c), ConfigError);
}

// Schedule and degradation sampling

TEST(LrSchedule, WarmupThenCosineToFloor) {
  TrainingConfig t;
  t.steps = 1000;
  t.warmup_steps = 100;
  t.min_lr_fraction = 0.1;
  EXPECT_NEAR(lr_scale(t, 0), 0.01, 1e-3);
  EXPECT_LT(lr_scale(t, 10), lr_scale(t, 50));
  EXPECT_NEAR(lr_scale(t, 99), 1.0, 1e-3);
  EXPECT_NEAR(lr_scale(t, 999), 0.1, 1e-4);
  for (std::size_t s = 100; s + 1 < 1000; ++s) EXPECT_GE(lr_scale(t, s), lr_scale(t, s + 1));
}

TEST(SampleDegradation, CutoffOnGridAndSnrInRange) {
  DegradationConfig d;
  const auto grid = cutoff_grid(d);
  ASSERT_EQ(grid.front(), 1000.0);
  ASSERT_EQ(grid.back(), 4000.0);
  std::mt19937_64 rng(3);
  std::size_t clean = 0;
  std::set<double> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto s = sample_degradation(d, rng);
    EXPECT_NE(std::find(grid.begin(), grid.end(), s.cutoff_hz), grid.end());
    seen.insert(s.cutoff_hz);
    if (!std::isfinite(s.snr_db)) {
      ++clean;
    } else {
      EXPECT_GE(s.snr_db, 5.0);
      EXPECT_LE(s.snr_db, 15.0);
    }
  }
  EXPECT_EQ(seen.size(), grid.size());
  EXPECT_NEAR(static_cast<double>(clean) / 2000.0, d.clean_fraction, 0.04);
}

// Ablation construction

TEST(Ablation, DisabledCotLeavesThreeConditioningTokens) {
  auto c = tiny_config();
  c.ablation.disable_cot = true;
  const auto vocab = conditioning::Vocabulary::build(conditioning::oracle_words(c.corpus.vocab_size));
  const auto mc = c.model_config(vocab.size());
  dsp::NormalizationStats stats;
  stats.mean.assign(mc.dit.latent_dim, 0.0);
  stats.std.assign(mc.dit.latent_dim, 1.0);
  auto model = flow::create_model<double>(mc, vocab, stats, {}, 0);

  conditioning::RecordFacts f;
  f.f0_hz = 120.0;
  f.tokens = {1, 2, 3, 4};
  f.cutoff_hz = 2000.0;
  const auto record = conditioning::oracle_record(f);
  dsp::PitchStats pitch;
  const auto in = flow::conditioning_inputs(mc, vocab, record, 2000.0, 16000, pitch);
  numerics::Tape<double> tape(numerics::Recording::off);
  const auto bundle = conditioning::build_conditioning(tape, model.params, mc.cond, in);
  EXPECT_EQ(bundle.tokens.rows(), 3u);

  c.ablation.disable_cot = false;
  const auto full = flow::conditioning_inputs(c.model_config(vocab.size()), vocab, record, 2000.0, 16000, pitch);
  EXPECT_GT(full.semantic_ids.size(), 4u);
}

// Commands

TEST(SynthData, SplitIsNinetyFiveFiveWithDisjointSpeakers) {
  TempDir dir;
  auto c = tiny_config();
  c.corpus.count = 200;
  c.corpus.utterances_per_speaker = 5;
  const auto s = cmd_synth_data(c, dir.path());
  EXPECT_EQ(s.train, 180u);
  EXPECT_EQ(s.val, 10u);
  EXPECT_EQ(s.test, 10u);

  const DataPaths paths{dir.path()};
  std::map<std::string, std::set<std::string>> speakers;
  std::set<std::string> ids;
  for (const char* split : {"train", "val", "test"}) {
    for (const auto& e : read_manifest(paths.manifest(split))) {
      speakers[split].insert(e.speaker);
      EXPECT_TRUE(ids.insert(e.id).second) << e.id;
      EXPECT_TRUE(fs::exists(dir.path() / e.wav_path)) << e.wav_path;
    }
  }
  EXPECT_EQ(ids.size(), 200u);
  for (const char* a : {"train", "val", "test"}) {
    for (const char* b : {"train", "val", "test"}) {
      if (std::string(a) >= b) continue;
      std::vector<std::string> both;
      std::set_intersection(speakers[a].begin(), speakers[a].end(), speakers[b].begin(), speakers[b].end(),
                            std::back_inserter(both));
      EXPECT_TRUE(both.empty()) << a << "/" << b;
    }
  }
  const auto summary = Json::parse(slurp(paths.summary()));
  EXPECT_EQ(summary.at("fingerprint"), s.fingerprint);
  EXPECT_EQ(summary.at("fingerprint"), fingerprint(c));

  const conditioning::ConditioningCache cache(paths.cot_cache());
  EXPECT_EQ(cache.size(), 200u);
}

TEST(SynthData, SameSeedSameBytes) {
  TempDir a, b;
  const auto c = tiny_config();
  cmd_synth_data(c, a.path() / "d");
  cmd_synth_data(c, b.path() / "d");
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "cot_cache.jsonl", "speaker_stats.json",
                        "dataset.json", "wav/utt00000.wav", "wav/utt00039.wav"}) {
    EXPECT_EQ(slurp(a.path() / "d" / f), slurp(b.path() / "d" / f)) << f;
  }
  auto other = c;
  other.corpus.seed += 1;
  cmd_synth_data(other, b.path() / "e");
  EXPECT_NE(slurp(a.path() / "d/train.jsonl"), slurp(b.path() / "e/train.jsonl"));
}

class TrainTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new TempDir();
    cmd_synth_data(tiny_config(), data_->path());
  }
  static void TearDownTestSuite() {
    delete data_;
    data_ = nullptr;
  }
  static TempDir* data_;
};
TempDir* TrainTest::data_ = nullptr;

TEST_F(TrainTest, WritesCheckpointsLogAndSummary) {
  TempDir run;
  const auto c = tiny_config();
  const auto s = cmd_train(c, data_->path(), run.path());
  EXPECT_EQ(s.steps, 12u);
  EXPECT_TRUE(std::isfinite(s.final_loss));
  for (const char* f : {"best.ckpt", "best.ckpt.json", "last.ckpt", "last.ckpt.json", "train_summary.json"}) {
    EXPECT_TRUE(fs::exists(run.path() / f)) << f;
  }
  std::ifstream log(run.path() / "loss_log.jsonl");
  std::string line;
  std::getline(log, line);
  EXPECT_EQ(Json::parse(line).at("fingerprint"), fingerprint(c));
  std::size_t losses = 0, vals = 0;
  while (std::getline(log, line)) {
    const auto j = Json::parse(line);
    losses += j.contains("loss");
    vals += j.contains("val_loss");
  }
  EXPECT_EQ(losses, 12u);
  EXPECT_EQ(vals, 3u);  // steps 5, 10, 12
  const auto summary = Json::parse(slurp(run.path() / "train_summary.json"));
  EXPECT_EQ(summary.at("fingerprint"), fingerprint(c));
  EXPECT_EQ(summary.at("data_order_hash"), s.data_order_hash);
  const auto meta = Json::parse(slurp(run.path() / "last.ckpt.json"));
  EXPECT_EQ(meta.at("fingerprint"), fingerprint(c));
}

TEST_F(TrainTest, InterruptedAndResumedRunMatchesUninterrupted) {
  TempDir a, b;
  const auto c = tiny_config();
  cmd_train(c, data_->path(), a.path());
  cmd_train(c, data_->path(), b.path(), false, 7);
  EXPECT_EQ(flow::load_model<float>(b.path() / "last.ckpt").step(), 7u);
  cmd_train(c, data_->path(), b.path(), true);
  for (const char* f : {"last.ckpt", "last.ckpt.json", "best.ckpt", "loss_log.jsonl", "train_summary.json"}) {
    EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
  }
}

TEST_F(TrainTest, ResumeWithDifferentConfigIsRejected) {
  TempDir run;
  auto c = tiny_config();
  cmd_train(c, data_->path(), run.path(), false, 3);
  c.training.lr *= 2;
  EXPECT_THROW(cmd_train(c, data_->path(), run.path(), true), ConfigError);
}

TEST_F(TrainTest, AblationVariantsShareDataOrder) {
  TempDir a, b;
  auto c = tiny_config();
  c.training.steps = 3;
  const auto full = cmd_train(c, data_->path(), a.path());
  c.ablation.disable_acoustic_priors = true;
  const auto ablated = cmd_train(c, data_->path(), b.path());
  EXPECT_EQ(full.data_order_hash, ablated.data_order_hash);
  EXPECT_NE(full.fingerprint, ablated.fingerprint);
}

TEST_F(TrainTest, EvaluateWritesDeterministicReport) {
  TempDir run;
  auto c = tiny_config();
  c.training.steps = 3;
  cmd_train(c, data_->path(), run.path());
  const auto manifest = DataPaths{data_->path()}.manifest("test");
  const auto r = cmd_evaluate(c, run.path() / "last.ckpt", manifest, run.path() / "a");
  cmd_evaluate(c, run.path() / "last.ckpt", manifest, run.path() / "b");
  EXPECT_EQ(slurp(run.path() / "a.json"), slurp(run.path() / "b.json"));
  EXPECT_EQ(slurp(run.path() / "a.txt"), slurp(run.path() / "b.txt"));
  const auto j = Json::parse(slurp(run.path() / "a.json"));
  EXPECT_EQ(j.at("config_fingerprint"), fingerprint(c));
  ASSERT_EQ(j.at("conditions").size(), 1u);
  EXPECT_EQ(j.at("conditions")[0].at("n"), read_manifest(manifest).size());
  EXPECT_EQ(r.conditions.size(), 1u);

  auto empty = c;
  empty.evaluation.conditions.clear();
  EXPECT_THROW(cmd_evaluate(empty, run.path() / "last.ckpt", manifest, run.path() / "c"), ConfigError);
}

TEST_F(TrainTest, AblateProducesFourRowsConsistentWithReports) {
  TempDir out;
  auto c = tiny_config();
  c.training.steps = 2;
  const auto rows = cmd_ablate(c, data_->path(), out.path());
  ASSERT_EQ(rows.size(), 4u);
  const std::vector<std::string> names{"Full", "w/o CoT", "w/o CoT (Transcript Only)", "w/o Acoustic Priors"};
  const auto table = Json::parse(slurp(out.path() / "ablation.json"));
  ASSERT_EQ(table.at("rows").size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rows[i].name, names[i]);
    EXPECT_EQ(rows[i].data_order_hash, rows[0].data_order_hash);
    const auto& row = table.at("rows")[i];
    const auto report = Json::parse(slurp(out.path() / rows[i].slug / "report.json"));
    const auto& means = report.at("conditions")[0].at("means");
    EXPECT_EQ(row.at("content_error").get<double>(), means.at("content_error_rate").get<double>());
    EXPECT_EQ(row.at("lsd").get<double>(), means.at("lsd").get<double>());
    EXPECT_EQ(row.at("sim").get<double>(), means.at("sim").get<double>());
  }
  const auto text = slurp(out.path() / "ablation.txt");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

// CLI

int run_cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "cogsr");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"train", "--config", "/nonexistent.json", "--data", ".", "--out", "x"}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}), cli::kExitOk);
}

TEST(Cli, BadConfigExitsOneBeforeSideEffects) {
  TempDir dir;
  auto j = mutable_config();
  j["corpus"]["colour"] = "red";
  const auto cfg = dir.path() / "bad.json";
  std::ofstream(cfg) << j.dump();
  std::string err;
  EXPECT_EQ(run_cli({"synth-data", "--config", cfg.string(), "--out", (dir.path() / "data").string()}, nullptr, &err),
            cli::kExitUsage);
  EXPECT_NE(err.find("corpus.colour"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(dir.path() / "data"));
}

TEST_F(TrainTest, RestoreCliValidatesCotAndIsDeterministic) {
  TempDir run;
  auto c = tiny_config();
  c.training.steps = 2;
  cmd_train(c, data_->path(), run.path());
  const auto item = read_manifest(DataPaths{data_->path()}.manifest("test")).front();
  const auto ckpt = (run.path() / "last.ckpt").string();
  const auto in = (data_->path() / item.wav_path).string();

  std::string err;
  EXPECT_EQ(run_cli({"restore", "--checkpoint", ckpt, "--in", in, "--out", (run.path() / "x.wav").string(), "--cot",
                     "[Gender]: Male; [Emotion Calm"},
                    nullptr, &err),
            cli::kExitUsage);
  EXPECT_NE(err.find("CoT parse error"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(run.path() / "x.wav"));
  EXPECT_EQ(run_cli({"restore", "--checkpoint", ckpt, "--in", in, "--out", (run.path() / "x.wav").string(), "--cot",
                     "[Gender]: Male"}),
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"restore", "--checkpoint", ckpt, "--in", in, "--out", (run.path() / "x.wav").string(), "--cache",
                     DataPaths{data_->path()}.cot_cache().string(), "--id", "nope"}),
            cli::kExitUsage);

  std::string out;
  for (const char* name : {"a.wav", "b.wav"}) {
    ASSERT_EQ(run_cli({"restore", "--checkpoint", ckpt, "--in", in, "--out", (run.path() / name).string(), "--cache",
                       DataPaths{data_->path()}.cot_cache().string(), "--id", item.id, "--steps", "4"},
                      &out, &err),
              cli::kExitOk)
        << err;
  }
  EXPECT_NE(out.find("encode"), std::string::npos);
  EXPECT_NE(out.find("decode"), std::string::npos);
  EXPECT_EQ(slurp(run.path() / "a.wav"), slurp(run.path() / "b.wav"));
}

}  // namespace
