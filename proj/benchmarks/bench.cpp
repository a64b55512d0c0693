#include <benchmark/benchmark.h>

#include <random>

#include "cogsr/conditioning/oracle.hpp"
#include "cogsr/dsp/mdct.hpp"
#include "cogsr/flow/model.hpp"
#include "cogsr/numerics/tape.hpp"

namespace {

using namespace cogsr;
using numerics::Tensor;

template <typename T>
Tensor<T> random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<T> v(r * c);
  for (auto& x : v) x = static_cast<T>(n(rng));
  return Tensor<T>::from({r, c}, std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor<float>(n, n, 1), b = random_tensor<float>(n, n, 2);
  numerics::Tape<float> tape(numerics::Recording::off);
  for (auto _ : state) benchmark::DoNotOptimize(tape.matmul(a, b).data().data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_tensor<float>(n, n, 1), b = random_tensor<float>(n, n, 2);
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  for (auto _ : state) {
    numerics::Tape<float> tape;
    tape.backward(tape.mean(tape.matmul(a, b)));
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(128);

void BM_MdctRoundTrip(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  dsp::Waveform w{std::vector<double>(16000), 16000};
  for (auto& s : w.samples) s = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::mdct_decode(dsp::mdct_encode(w, n)).samples.data());
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_MdctRoundTrip)->Arg(64)->Arg(256);

flow::ModelState<float> bench_model() {
  flow::ModelConfig cfg;
  cfg.dit.max_frames = 128;
  const auto vocab = conditioning::Vocabulary::build(conditioning::oracle_words(14));
  dsp::NormalizationStats stats;
  stats.mean.assign(cfg.dit.latent_dim, 0.0);
  stats.std.assign(cfg.dit.latent_dim, 1.0);
  cfg.cond.cond_width = cfg.dit.cond_width;
  return flow::create_model<float>(cfg, vocab, stats, {}, 0);
}

void BM_DiTForward(benchmark::State& state) {
  const auto model = bench_model();
  const auto frames = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = model.config.dit.latent_dim;
  const auto xt = random_tensor<float>(frames, dim, 4), lr = random_tensor<float>(frames, dim, 5);
  conditioning::RecordFacts f;
  f.f0_hz = 140.0;
  f.tokens = {1, 5, 9};
  f.cutoff_hz = 2000.0;
  const auto cond = flow::conditioning_inputs(model.config, model.vocab, conditioning::oracle_record(f), 2000.0,
                                              16000, dsp::PitchStats{140.0, 0.05, 0.8});
  for (auto _ : state) {
    numerics::Tape<float> tape(numerics::Recording::off);
    const auto bundle = conditioning::build_conditioning(tape, model.params, model.config.cond, cond);
    benchmark::DoNotOptimize(
        flow::dit_forward(tape, model.params, model.config.dit, xt, 0.5, lr, bundle).data().data());
  }
}
BENCHMARK(BM_DiTForward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
