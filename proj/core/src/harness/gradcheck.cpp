#include "cogsr/harness/gradcheck.hpp"

#include <functional>
#include <optional>
#include <random>

#include "cogsr/conditioning/oracle.hpp"
#include "cogsr/dsp/synth.hpp"
#include "cogsr/error.hpp"
#include "cogsr/flow/model.hpp"
#include "cogsr/flow/rectified_flow.hpp"
#include "cogsr/util.hpp"

namespace cogsr::harness {

using numerics::GradCheckOptions;
using numerics::Tape;
using Td = numerics::Tensor<double>;

namespace {

Td random_tensor(numerics::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(numerics::shape_size(shape));
  for (auto& x : v) x = u(rng);
  return Td::from(std::move(shape), std::move(v), true);
}

numerics::GradCheckReport check_op(const std::string& op, std::uint64_t seed) {
  std::mt19937_64 rng(fnv1a64(op, seed));
  Td a = random_tensor({3, 4}, rng);
  Td b = random_tensor({3, 4}, rng);
  Td row = random_tensor({4}, rng);
  Td m = random_tensor({4, 5}, rng);
  Td gain = random_tensor({4}, rng, 0.5, 1.5);
  Td table = random_tensor({6, 4}, rng);
  Td bias = random_tensor({5}, rng);
  const std::vector<int> ids = {1, 4, 1, 0};
  const std::vector<int> labels = {2, 0, 3};

  std::vector<std::pair<std::string, Td>> inputs;
  std::function<Td(Tape<double>&)> body;
  if (op == "add") {
    inputs = {{"a", a}, {"row", row}};
    body = [&](Tape<double>& t) { return t.add(t.add(a, row), a); };
  } else if (op == "sub") {
    inputs = {{"a", a}, {"b", b}, {"row", row}};
    body = [&](Tape<double>& t) { return t.sub(t.sub(a, b), row); };
  } else if (op == "mul") {
    inputs = {{"a", a}, {"b", b}, {"row", row}};
    body = [&](Tape<double>& t) { return t.mul(t.mul(a, b), row); };
  } else if (op == "scale") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.scale(a, -2.5); };
  } else if (op == "matmul") {
    inputs = {{"a", a}, {"m", m}};
    body = [&](Tape<double>& t) { return t.matmul(a, m); };
  } else if (op == "transpose") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.transpose(a); };
  } else if (op == "reshape") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.reshape(a, {2, 6}); };
  } else if (op == "concat") {
    inputs = {{"a", a}, {"b", b}};
    body = [&](Tape<double>& t) {
      const std::vector<Td> parts = {a, b};
      return t.add(t.reshape(t.concat(parts, 0), {3, 8}), t.concat(parts, 1));
    };
  } else if (op == "slice") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.slice(t.slice(a, 0, 1, 3), 1, 1, 3); };
  } else if (op == "softmax") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.softmax(t.scale(a, 3.0)); };
  } else if (op == "layer_norm") {
    inputs = {{"a", a}, {"gain", gain}, {"row", row}};
    body = [&](Tape<double>& t) { return t.layer_norm(a, gain, row, 1e-5); };
  } else if (op == "silu") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.silu(t.scale(a, 3.0)); };
  } else if (op == "embedding") {
    inputs = {{"table", table}};
    body = [&](Tape<double>& t) { return t.embedding(table, ids); };
  } else if (op == "mean") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.mean(t.mul(a, a)); };
  } else if (op == "mse") {
    inputs = {{"a", a}, {"b", b}};
    body = [&](Tape<double>& t) { return t.mse(a, b); };
  } else if (op == "softmax_cross_entropy") {
    inputs = {{"a", a}};
    body = [&](Tape<double>& t) { return t.softmax_cross_entropy(a, labels); };
  } else if (op == "linear") {
    inputs = {{"a", a}, {"m", m}, {"bias", bias}};
    body = [&](Tape<double>& t) { return t.linear(a, m, bias); };
  } else {
    throw ValidationError("no gradient check defined for op " + op);
  }

  std::optional<Td> projection;
  const numerics::ScalarFunction<double> f = [&](Tape<double>& t) {
    Td out = body(t);
    if (out.size() == 1) return out;
    if (!projection) {
      std::mt19937_64 prng(fnv1a64("projection", seed));
      projection = random_tensor(out.shape(), prng);
    }
    return t.mean(t.mul(out, *projection));
  };
  GradCheckOptions opts;
  opts.seed = seed;
  return numerics::grad_check<double>(f, inputs, opts);
}

}  // namespace

std::vector<NamedGradReport> gradcheck_ops(std::uint64_t seed) {
  std::vector<NamedGradReport> out;
  for (auto op : numerics::registered_ops()) {
    const std::string name(op);
    out.push_back({name, check_op(name, seed)});
  }
  return out;
}

NamedGradReport gradcheck_dit(std::uint64_t seed) {
  flow::ModelConfig c;
  c.dit = {.depth = 2, .model_dim = 16, .num_heads = 2, .latent_dim = 8, .max_frames = 8, .cond_width = 8,
           .mlp_ratio = 2, .time_embed_dim = 8, .seed = seed};
  c.cond.cond_width = 8;
  c.cond.pitch_dim = 4;
  c.cond.fourier_k = 4;
  auto vocab = conditioning::Vocabulary::build(conditioning::oracle_words(dsp::kMaxTokens));
  auto stats = dsp::NormalizationStats::from_moments(std::vector<double>(8, 0.0), std::vector<double>(8, 1.0));
  auto model = flow::create_model<double>(c, vocab, stats, {}, seed);

  std::mt19937_64 rng(fnv1a64("dit-gradcheck", seed));
  std::normal_distribution<double> g(0.0, 0.2);
  for (auto& [name, p] : model.params.entries()) {
    for (auto& v : p.values()) v += g(rng);
  }
  const std::size_t frames = 5;
  std::vector<double> x1(frames * 8), x0(frames * 8), lr(frames * 8);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (auto* v : {&x1, &x0, &lr}) {
    for (auto& e : *v) e = unit(rng);
  }
  const auto sample = flow::make_flow_sample(x1, x0, 0.37);
  conditioning::RecordFacts facts;
  facts.tokens = {1, 6, 9};
  facts.cutoff_hz = 2000.0;
  const auto cond = flow::conditioning_inputs(c, vocab, conditioning::oracle_record(facts), 2000.0, 16000,
                                              {140.0, 0.05, 0.8});
  const numerics::ScalarFunction<double> f = [&](Tape<double>& tape) {
    const auto bundle = conditioning::build_conditioning(tape, model.params, model.config.cond, cond);
    const auto pred = flow::dit_forward(tape, model.params, model.config.dit, Td::from({frames, 8}, sample.xt),
                                        sample.t, Td::from({frames, 8}, lr), bundle);
    return tape.mse(pred, Td::from({frames, 8}, sample.target));
  };
  GradCheckOptions opts;
  opts.max_coordinates = 400;
  opts.seed = seed;
  return {"dit_rf_loss", numerics::grad_check<double>(f, model.params.entries(), opts)};
}

}  // namespace cogsr::harness
