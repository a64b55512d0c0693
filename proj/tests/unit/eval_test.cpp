#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "cogsr/dsp/filter.hpp"
#include "cogsr/conditioning/oracle.hpp"
#include "cogsr/error.hpp"
#include "cogsr/eval/content.hpp"
#include "cogsr/eval/corpus.hpp"
#include "cogsr/eval/metrics.hpp"
#include "cogsr/eval/speaker.hpp"

namespace {

using namespace cogsr;
using namespace cogsr::eval;

dsp::Spectrogram random_spec(std::size_t frames, std::size_t bins, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  dsp::Spectrogram s;
  s.frames = frames;
  s.bins = bins;
  s.fft_len = 2 * (bins - 1);
  s.hop = s.fft_len / 4;
  s.magnitude.resize(frames * bins);
  for (auto& v : s.magnitude) v = u(rng);
  s.magnitude[3] = 0.0;
  return s;
}

double naive_lsd(const dsp::Spectrogram& a, const dsp::Spectrogram& b) {
  double outer = 0.0;
  for (std::size_t t = 0; t < a.frames; ++t) {
    double inner = 0.0;
    for (std::size_t f = 0; f < a.bins; ++f) {
      const double x = std::max(a.magnitude[t * a.bins + f], 1e-8);
      const double y = std::max(b.magnitude[t * b.bins + f], 1e-8);
      const double d = 2.0 * (std::log10(x) - std::log10(y));
      inner += d * d;
    }
    outer += std::sqrt(inner / static_cast<double>(a.bins));
  }
  return outer / static_cast<double>(a.frames);
}

TEST(Lsd, IdenticalIsZero) {
  const auto s = random_spec(20, 33, 1);
  EXPECT_EQ(lsd(s, s), 0.0);
}

TEST(Lsd, TenfoldIsTwo) {
  const auto s = random_spec(20, 33, 2);
  auto g = s;
  for (auto& v : g.magnitude) v = std::max(v, 1e-6) * 10.0;
  auto r = s;
  for (auto& v : r.magnitude) v = std::max(v, 1e-6);
  EXPECT_NEAR(lsd(r, g), 2.0, 1e-12);
}

TEST(Lsd, ScalingClosedFormAndSymmetry) {
  auto s = random_spec(15, 17, 3);
  for (auto& v : s.magnitude) v += 0.1;
  for (double c : {0.01, 0.5, 3.0, 1000.0}) {
    auto g = s;
    for (auto& v : g.magnitude) v *= c;
    EXPECT_NEAR(lsd(s, g), std::abs(2.0 * std::log10(c)), 1e-12) << c;
  }
  const auto a = random_spec(15, 17, 4);
  const auto b = random_spec(15, 17, 5);
  EXPECT_NEAR(lsd(a, b), lsd(b, a), 1e-14);
}

TEST(Lsd, MatchesDoubleLoopOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = random_spec(25, 65, 10 + seed);
    const auto b = random_spec(25, 65, 20 + seed);
    EXPECT_NEAR(lsd(a, b), naive_lsd(a, b), 1e-10);
  }
}

TEST(Lsd, FrameTolerance) {
  const auto a = random_spec(20, 9, 6);
  auto b = a;
  b.frames = 18;
  b.magnitude.resize(18 * 9);
  EXPECT_EQ(lsd(a, b), 0.0);
  b.frames = 17;
  b.magnitude.resize(17 * 9);
  EXPECT_THROW(lsd(a, b), DimensionError);
  EXPECT_THROW(lsd(a, random_spec(20, 10, 1)), DimensionError);
}

TEST(Lsd, HighBandIgnoresPreservedLowBand) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.1);
  dsp::Waveform w;
  w.samples.resize(16000);
  for (auto& v : w.samples) v = g(rng);
  const auto lp = dsp::lowpass(w, 4000.0);
  EXPECT_GT(lsd(w, lp), 0.5);
  EXPECT_GT(lsd_highband(w, lp, 4000.0), lsd(w, lp));
  EXPECT_LT(lsd_highband(w, lp, 4000.0) * 0.5, lsd(w, lp) * 1.5);
}

std::size_t brute_force_edits(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t sub = brute_force_edits(a.subspan(1), b.subspan(1)) + (a[0] == b[0] ? 0 : 1);
  const std::size_t del = brute_force_edits(a.subspan(1), b) + 1;
  const std::size_t ins = brute_force_edits(a, b.subspan(1)) + 1;
  return std::min({sub, del, ins});
}

TEST(Wer, ClosedForms) {
  const std::vector<std::string> ref{"help", "is", "on", "the", "way"};
  EXPECT_EQ(wer(ref, ref), 0.0);
  auto hyp = ref;
  hyp[2] = "in";
  EXPECT_DOUBLE_EQ(wer(ref, hyp), 0.2);
  EXPECT_DOUBLE_EQ(wer(ref, std::vector<std::string>{}), 1.0);
  EXPECT_THROW(wer(std::vector<std::string>{}, ref), ValidationError);
}

TEST(Wer, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 6), tok(0, 3);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<int> a(static_cast<std::size_t>(len(rng) + 0)), b(static_cast<std::size_t>(len(rng)));
    if (a.empty()) a.push_back(0);
    for (auto& v : a) v = tok(rng);
    for (auto& v : b) v = tok(rng);
    const auto d = brute_force_edits(a, b);
    EXPECT_EQ(edit_distance(std::span<const int>(a), std::span<const int>(b)), d);
    const double r = wer(std::span<const int>(a), std::span<const int>(b));
    EXPECT_DOUBLE_EQ(r, static_cast<double>(d) / static_cast<double>(a.size()));
    EXPECT_EQ(r == 0.0, a == b);
    EXPECT_LE(r, static_cast<double>(a.size() + b.size()) / static_cast<double>(a.size()));
  }
}

TEST(SpeakerSim, ClosedForms) {
  const std::vector<double> a{1.0, 2.0, -3.0};
  EXPECT_NEAR(speaker_sim(a, a), 1.0, 1e-15);
  EXPECT_EQ(speaker_sim(std::vector<double>{1, 0}, std::vector<double>{0, 5}), 0.0);
  EXPECT_NEAR(speaker_sim(a, std::vector<double>{-1.0, -2.0, 3.0}), -1.0, 1e-15);
  EXPECT_THROW(speaker_sim(a, std::vector<double>{0, 0, 0}), ValidationError);
  EXPECT_THROW(speaker_sim(a, std::vector<double>{1, 2}), DimensionError);
}

TEST(SpeakerSim, MatchesDirectOracle) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(19), b(19);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    const double s = speaker_sim(a, b);
    EXPECT_NEAR(s, dot / std::sqrt(na * nb), 1e-12);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(speaker_sim(a, a), 1.0, 1e-12);
  }
}

dsp::SynthesizedUtterance speaker_utterance(double f0, double formant_hz, std::vector<int> tokens, std::uint64_t seed) {
  dsp::SyntheticUtteranceSpec spec;
  spec.f0_hz = f0;
  spec.formants = {{formant_hz, 250.0, 10.0}, {formant_hz * 1.7, 300.0, 8.0}};
  spec.content_tokens = std::move(tokens);
  spec.duration_s = 1.2;
  spec.rng_seed = seed;
  return dsp::synth_utterance(spec);
}

SpeakerEmbeddingStats corpus_stats() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> f0(90.0, 280.0), formant(1200.0, 2200.0);
  std::uniform_int_distribution<int> tok(0, dsp::kMaxTokens - 1);
  std::vector<std::vector<double>> raw;
  for (int s = 0; s < 12; ++s) {
    const double f = f0(rng), m = formant(rng);
    for (int k = 0; k < 2; ++k) {
      std::vector<int> tokens(3);
      for (auto& t : tokens) t = tok(rng);
      raw.push_back(raw_speaker_features(speaker_utterance(f, m, tokens, static_cast<std::uint64_t>(10 * s + k)).audio));
    }
  }
  return SpeakerEmbeddingStats::compute(raw);
}

TEST(SpeakerEmbedding, DeterministicAndSized) {
  const auto u = speaker_utterance(130, 600, {1, 2}, 1);
  const auto a = proxy_speaker_embedding(u.audio);
  EXPECT_EQ(a.size(), kSpeakerEmbeddingDim);
  EXPECT_EQ(a, proxy_speaker_embedding(u.audio));
  dsp::Waveform short_w;
  short_w.samples.assign(7999, 0.1);
  EXPECT_THROW(proxy_speaker_embedding(short_w), ValidationError);
}

TEST(SpeakerEmbedding, SameSpeakerDifferentContentIsClose) {
  const auto stats = corpus_stats();
  const auto a = proxy_speaker_embedding(speaker_utterance(110, 1500, {0, 1, 2}, 2).audio, stats);
  const auto b = proxy_speaker_embedding(speaker_utterance(110, 1500, {7, 8, 9}, 3).audio, stats);
  const auto far = proxy_speaker_embedding(speaker_utterance(300, 1500, {0, 1, 2}, 2).audio, stats);
  const double same = speaker_sim(a, b);
  EXPECT_GE(same, 0.9);
  EXPECT_LT(speaker_sim(a, far), same);
}

TEST(Content, CleanSynthesisClassifiesItself) {
  const auto bank = TemplateBank::build();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> tok(0, dsp::kMaxTokens - 1);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<int> tokens(4);
    for (auto& t : tokens) t = tok(rng);
    const auto u = speaker_utterance(100.0 + 30.0 * trial, 1300.0 + 150.0 * trial, tokens, 100 + trial);
    EXPECT_EQ(classify_tokens(u.audio, u.labels, bank), tokens);
    EXPECT_EQ(content_error_rate(u.audio, u.labels, bank), 0.0);
  }
}

TEST(Content, HighBandRemovedIsNearChance) {
  const auto bank = TemplateBank::build();
  std::size_t wrong = 0, total = 0;
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<int> tokens;
    for (int k = 0; k < 4; ++k) tokens.push_back((trial * 4 + k) % dsp::kMaxTokens);
    const auto u = speaker_utterance(140.0, 1600.0, tokens, 200 + trial);
    const auto lp = dsp::lowpass(u.audio, 3900.0);
    const auto hyp = classify_tokens(lp, u.labels, bank);
    for (std::size_t i = 0; i < tokens.size(); ++i) wrong += hyp[i] != tokens[i];
    total += tokens.size();
  }
  EXPECT_GE(static_cast<double>(wrong) / static_cast<double>(total), 0.7);
}

TEST(Content, SlotErrorRate) {
  const std::vector<int> ref{1, 2, 3, 4};
  EXPECT_EQ(slot_error_rate(ref, ref), 0.0);
  EXPECT_EQ(slot_error_rate(ref, std::vector<int>{1, 2, 4, 3}), 0.5);
  EXPECT_THROW(slot_error_rate(ref, std::vector<int>{1}), DimensionError);
}

std::vector<EvalItem> eval_items(std::size_t n) {
  std::vector<EvalItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    auto u = speaker_utterance(100.0 + 15.0 * static_cast<double>(i), 1250.0 + 80.0 * static_cast<double>(i),
                               {static_cast<int>(i % 14), static_cast<int>((i + 5) % 14), static_cast<int>((i + 9) % 14)},
                               300 + i);
    items.push_back({"utt" + std::to_string(i), u.audio, u.labels, "Neutral"});
  }
  return items;
}

TEST(Corpus, EmptyInputsFail) {
  const auto bank = TemplateBank::build(2);
  const SpeakerEmbeddingStats stats;
  const EvalContext ctx{bank, stats};
  const Restorer identity = [](const dsp::Waveform& lr, const auto&, const auto&, std::uint64_t) { return lr; };
  const std::vector<EvalCondition> conds{{2000.0}};
  EXPECT_THROW(evaluate_with(identity, {}, conds, ctx, {}), ValidationError);
  const auto items = eval_items(1);
  EXPECT_THROW(evaluate_with(identity, items, {}, ctx, {}), ValidationError);
}

TEST(Corpus, IdentityRestorerReportsInputDistance) {
  const auto bank = TemplateBank::build();
  const SpeakerEmbeddingStats stats;
  const EvalContext ctx{bank, stats};
  const auto items = eval_items(4);
  const Restorer identity = [](const dsp::Waveform& lr, const auto&, const auto&, std::uint64_t) { return lr; };
  const std::vector<EvalCondition> conds{{2000.0}, {4000.0, 10.0, dsp::NoiseKind::hum}};
  const auto r = evaluate_with(identity, items, conds, ctx, {});
  ASSERT_EQ(r.conditions.size(), 2u);
  for (const auto& c : r.conditions) {
    EXPECT_EQ(c.per_utterance.size(), 4u);
    for (const auto& u : c.per_utterance) EXPECT_EQ(u.lsd, u.lsd_input);
    EXPECT_GT(c.means.content_error_rate, 0.5) << c.condition.cutoff_hz;
  }
}

TEST(Corpus, FailuresAreCountedAndBounded) {
  const auto bank = TemplateBank::build();
  const SpeakerEmbeddingStats stats;
  const EvalContext ctx{bank, stats};
  const auto items = eval_items(3);
  const Restorer flaky = [](const dsp::Waveform& lr, const auto&, const auto&, std::uint64_t) {
    if (lr.samples[100] > 0) throw RuntimeFailure("flaky");
    return lr;
  };
  const std::vector<EvalCondition> conds{{3000.0}};
  EvalOptions opt;
  opt.max_failure_fraction = 1.0;
  const auto r = evaluate_with(flaky, items, conds, ctx, opt);
  EXPECT_EQ(r.conditions[0].failures + r.conditions[0].per_utterance.size(), 3u);
  const Restorer broken = [](const dsp::Waveform&, const auto&, const auto&, std::uint64_t) -> dsp::Waveform {
    throw RuntimeFailure("broken");
  };
  EXPECT_THROW(evaluate_with(broken, items, conds, ctx, {}), RuntimeFailure);
}

TEST(Corpus, ModelSmokeReportIsSchemaValidAndDeterministic) {
  flow::ModelConfig c;
  c.dit = {.depth = 1, .model_dim = 16, .num_heads = 2, .latent_dim = 32, .max_frames = 64, .cond_width = 8,
           .mlp_ratio = 2, .time_embed_dim = 8, .seed = 1};
  c.cond.cond_width = 8;
  c.cond.pitch_dim = 4;
  auto vocab = conditioning::Vocabulary::build(conditioning::oracle_words(dsp::kMaxTokens));
  auto norm = dsp::NormalizationStats::from_moments(std::vector<double>(32, 0.0), std::vector<double>(32, 0.01));
  auto model = flow::create_model<float>(c, vocab, norm, {}, 1);
  const auto bank = TemplateBank::build();
  const auto stats = corpus_stats();
  const EvalContext ctx{bank, stats};
  const auto items = eval_items(10);
  const std::vector<EvalCondition> conds{{2000.0, 5.0, dsp::NoiseKind::pink}};
  EvalOptions opt;
  opt.steps = 2;
  opt.config_fingerprint = "smoke";
  const auto r = evaluate_corpus(model, items, conds, ctx, opt);
  const auto text = report_json(r);
  EXPECT_EQ(text, report_json(evaluate_corpus(model, items, conds, ctx, opt)));

  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j.at("config_fingerprint"), "smoke");
  EXPECT_EQ(j.at("wer_source"), "content-proxy");
  const auto& cj = j.at("conditions").at(0);
  EXPECT_EQ(cj.at("n"), 10);
  EXPECT_EQ(cj.at("snr_db"), 5.0);
  const auto& per = cj.at("per_utterance");
  ASSERT_EQ(per.size(), 10u);
  for (const char* key : {"lsd", "lsd_highband", "lsd_input", "wer", "sim", "content_error_rate"}) {
    double sum = 0;
    for (const auto& u : per) sum += u.at(key).get<double>();
    EXPECT_NEAR(cj.at("means").at(key).get<double>(), sum / 10.0, 1e-12) << key;
  }
  EXPECT_NE(report_table(r).find("WER(proxy)"), std::string::npos);
}

}  // namespace
