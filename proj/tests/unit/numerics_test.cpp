#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "cogsr/error.hpp"
#include "cogsr/numerics/adamw.hpp"
#include "cogsr/numerics/checkpoint.hpp"
#include "cogsr/numerics/grad_check.hpp"
#include "cogsr/numerics/parameters.hpp"
#include "cogsr/numerics/tape.hpp"

namespace cogsr::numerics {
namespace {

using Td = Tensor<double>;

Td random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = dist(rng);
  return Td::from(std::move(shape), std::move(v));
}

// ---------------------------------------------------------------- matmul

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  std::mt19937_64 rng(1);
  Tape<double> tape;
  Td a = random_tensor({3, 3}, rng);
  Td eye = Td::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Td c = tape.matmul(a, eye);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(c[i], a[i]);
}

TEST(Matmul, ZeroAnnihilates) {
  std::mt19937_64 rng(2);
  Tape<double> tape;
  Td c = tape.matmul(Td::zeros({2, 3}), random_tensor({3, 4}, rng));
  EXPECT_EQ(c.shape(), (Shape{2, 4}));
  for (double v : c.data()) EXPECT_EQ(v, 0.0);
}

TEST(Matmul, MatchesTripleLoop) {
  std::mt19937_64 rng(3);
  Tape<double> tape;
  Td a = random_tensor({2, 3}, rng);
  Td b = random_tensor({3, 2}, rng);
  Td c = tape.matmul(a, b);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double ref = 0;
      for (std::size_t k = 0; k < 3; ++k) ref += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), ref, 1e-12);
    }
  }
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  Tape<double> tape;
  try {
    tape.matmul(Td::zeros({2, 3}), Td::zeros({4, 2}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

// ---------------------------------------------------------------- softmax

TEST(Softmax, UniformOnEqualLogits) {
  Tape<double> tape;
  Td y = tape.softmax(Td::zeros({1, 3}));
  for (double v : y.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitsDoNotOverflow) {
  Tape<double> tape;
  Td y = tape.softmax(Td::from({1, 2}, {1000.0, 0.0}));
  EXPECT_TRUE(y.all_finite());
  EXPECT_NEAR(y[0], 1.0, 1e-12);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
}

TEST(Softmax, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(4);
  Tape<double> tape;
  Td x = random_tensor({1, 5}, rng, -4.0, 4.0);
  Td y = tape.softmax(x);
  long double sum = 0;
  for (double v : x.data()) sum += std::exp(static_cast<long double>(v));
  for (std::size_t i = 0; i < 5; ++i) {
    const long double ref = std::exp(static_cast<long double>(x[i])) / sum;
    EXPECT_NEAR(y[i], static_cast<double>(ref), 1e-12);
  }
}

TEST(Softmax, RowsAreDistributionsOnRandomInputs) {
  std::mt19937_64 rng(5);
  Tape<double> tape(Recording::off);
  for (int trial = 0; trial < 200; ++trial) {
    Td x = random_tensor({4, 7}, rng, -50.0, 50.0);
    Td y = tape.softmax(x);
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0;
      for (std::size_t c = 0; c < 7; ++c) {
        EXPECT_GE(y.at(r, c), 0.0);
        s += y.at(r, c);
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

// ---------------------------------------------------------------- layer_norm

TEST(LayerNorm, ConstantRowMapsToZero) {
  Tape<double> tape;
  Td y = tape.layer_norm(Td::full({1, 4}, 3.5), Td::full({4}, 1.0), Td::zeros({4}), 1e-5);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, SymmetricPairHasUnitVariance) {
  Tape<double> tape;
  Td y = tape.layer_norm(Td::from({1, 2}, {1.0, -1.0}), Td::full({2}, 1.0), Td::zeros({2}), 1e-12);
  EXPECT_NEAR(y[0], 1.0, 1e-9);
  EXPECT_NEAR(y[1], -1.0, 1e-9);
}

TEST(LayerNorm, MatchesTwoPassOracle) {
  std::mt19937_64 rng(6);
  Tape<double> tape;
  Td x = random_tensor({3, 16}, rng, -3.0, 5.0);
  Td gain = random_tensor({16}, rng);
  Td bias = random_tensor({16}, rng);
  const double eps = 1e-5;
  Td y = tape.layer_norm(x, gain, bias, eps);
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0;
    for (std::size_t c = 0; c < 16; ++c) mean += x.at(r, c);
    mean /= 16;
    double var = 0;
    for (std::size_t c = 0; c < 16; ++c) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
    var /= 16;
    for (std::size_t c = 0; c < 16; ++c) {
      const double ref = (x.at(r, c) - mean) / std::sqrt(var + eps) * gain[c] + bias[c];
      EXPECT_NEAR(y.at(r, c), ref, 1e-10);
    }
  }
}

TEST(LayerNorm, NormalizedRowsHaveZeroMeanUnitVariance) {
  std::mt19937_64 rng(7);
  Tape<double> tape(Recording::off);
  Td y = tape.layer_norm(random_tensor({8, 32}, rng, -10, 10), Td{}, Td{}, 1e-12);
  for (std::size_t r = 0; r < 8; ++r) {
    double m = 0, v = 0;
    for (std::size_t c = 0; c < 32; ++c) m += y.at(r, c);
    m /= 32;
    for (std::size_t c = 0; c < 32; ++c) v += (y.at(r, c) - m) * (y.at(r, c) - m);
    v /= 32;
    EXPECT_NEAR(m, 0.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
}

TEST(LayerNorm, RejectsSingleElementAxis) {
  Tape<double> tape;
  EXPECT_THROW(tape.layer_norm(Td::zeros({3, 1}), Td{}, Td{}, 1e-5), DimensionError);
}

// ---------------------------------------------------------------- backward

TEST(Backward, SumGivesOnes) {
  std::mt19937_64 rng(8);
  Tape<double> tape;
  Td x = random_tensor({3, 4}, rng);
  x.set_requires_grad(true);
  Td loss = tape.scale(tape.mean(x), 12.0);
  tape.backward(loss);
  for (double g : x.grad()) EXPECT_NEAR(g, 1.0, 1e-15);
}

TEST(Backward, MseOfIdenticalInputsHasZeroGradient) {
  std::mt19937_64 rng(9);
  Tape<double> tape;
  Td x = random_tensor({5}, rng);
  x.set_requires_grad(true);
  tape.backward(tape.mse(x, x));
  for (double g : x.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, RejectsNonScalarLossAndEmptyTape) {
  Tape<double> tape;
  Td x = Td::zeros({2, 2}, true);
  Td y = tape.scale(x, 2.0);
  EXPECT_THROW(tape.backward(y), DimensionError);
  Tape<double> empty;
  EXPECT_THROW(empty.backward(Td::scalar(1.0)), Error);
}

TEST(Backward, SharedSubexpressionAccumulatesLikeExpandedGraph) {
  std::mt19937_64 rng(10);
  Td w = random_tensor({4, 4}, rng);
  Td x = random_tensor({3, 4}, rng);
  Tape<double> shared_tape;
  Td xs = x.clone();
  xs.set_requires_grad(true);
  // h is used three times downstream.
  Td h = shared_tape.silu(shared_tape.matmul(xs, w));
  Td y = shared_tape.add(shared_tape.mul(h, h), shared_tape.matmul(h, w));
  shared_tape.backward(shared_tape.mean(y));

  // Expanded: three independent copies of x feed three copies of h.
  Tape<double> exp_tape;
  std::vector<Td> copies;
  for (int i = 0; i < 3; ++i) {
    copies.push_back(x.clone());
    copies.back().set_requires_grad(true);
  }
  auto hk = [&](int k) { return exp_tape.silu(exp_tape.matmul(copies[k], w)); };
  Td ye = exp_tape.add(exp_tape.mul(hk(0), hk(1)), exp_tape.matmul(hk(2), w));
  exp_tape.backward(exp_tape.mean(ye));

  for (std::size_t i = 0; i < x.size(); ++i) {
    const double expanded = copies[0].grad()[i] + copies[1].grad()[i] + copies[2].grad()[i];
    EXPECT_NEAR(xs.grad()[i], expanded, 1e-14);
  }
}

TEST(Tape, ClearDropsEntriesAndBackwardVisitsEachOnce) {
  Tape<double> tape;
  Td x = Td::from({2}, {1.0, 2.0}, true);
  Td loss = tape.mean(tape.mul(x, x));
  EXPECT_EQ(tape.size(), 2u);
  tape.backward(loss);
  EXPECT_NEAR(x.grad()[0], 1.0, 1e-15);
  EXPECT_NEAR(x.grad()[1], 2.0, 1e-15);
  tape.clear();
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Tape, NoRecordingWhenDisabled) {
  Tape<double> tape(Recording::off);
  Td x = Td::zeros({2, 2}, true);
  Td y = tape.silu(x);
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_FALSE(y.requires_grad());
}

// ---------------------------------------------------------------- grad_check

TEST(GradCheck, SquareAtThree) {
  Td x = Td::scalar(3.0);
  GradCheckReport r = grad_check<double>([&](Tape<double>& t) { return t.mul(x, x); }, {{"x", x}});
  EXPECT_LE(r.max_relative_error, 1e-8);
  EXPECT_NEAR(r.worst_analytic, 6.0, 1e-15);
}

TEST(GradCheck, SoftmaxCrossEntropyOnRandomLogits) {
  std::mt19937_64 rng(11);
  Td logits = random_tensor({4, 6}, rng, -3, 3);
  std::vector<int> labels = {0, 3, 5, 2};
  GradCheckReport r =
      grad_check<double>([&](Tape<double>& t) { return t.softmax_cross_entropy(logits, labels); },
                         {{"logits", logits}});
  EXPECT_EQ(r.coordinates_checked, 24u);
  EXPECT_LE(r.max_relative_error, 1e-6);
}

// Every registered op, reduced to a scalar via a fixed random projection.
class EveryOp : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryOp, MatchesCentralDifferences) {
  const std::string op = GetParam();
  std::mt19937_64 rng(std::hash<std::string>{}(op) & 0xffff);
  Td a = random_tensor({3, 4}, rng);
  Td b = random_tensor({3, 4}, rng);
  Td row = random_tensor({4}, rng);
  Td m = random_tensor({4, 5}, rng);
  Td gain = random_tensor({4}, rng, 0.5, 1.5);
  Td table = random_tensor({6, 4}, rng);
  std::vector<int> ids = {1, 4, 1, 0};
  std::vector<int> labels = {2, 0, 3};

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
      std::vector<Td> rows = {a, b};
      std::vector<Td> cols = {a, b};
      return t.add(t.reshape(t.concat(rows, 0), {3, 8}), t.concat(cols, 1));
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
    inputs = {{"a", a}, {"m", m}, {"bias", Td::from({5}, {0.1, -0.2, 0.3, 0.0, 0.5})}};
    Td bias = inputs.back().second;
    body = [&, bias](Tape<double>& t) { return t.linear(a, m, bias); };
  } else {
    FAIL() << "op without a gradient test: " << op;
  }

  // Scalarize: mean(out * R) with a fixed random R of the output's shape.
  std::optional<Td> projection;
  auto f = [&](Tape<double>& t) {
    Td out = body(t);
    if (out.size() == 1) return out;
    if (!projection) {
      std::mt19937_64 prng(99);
      projection = random_tensor(out.shape(), prng);
    }
    return t.mean(t.mul(out, *projection));
  };
  GradCheckOptions opts;
  opts.max_coordinates = 100;
  GradCheckReport r = grad_check<double>(f, inputs, opts);
  EXPECT_GT(r.coordinates_checked, 0u);
  EXPECT_LE(r.max_relative_error, 1e-4) << op << " worst " << r.worst_tensor << "[" << r.worst_index
                                        << "] analytic " << r.worst_analytic << " numeric " << r.worst_numeric;
}

std::vector<std::string> op_names() {
  std::vector<std::string> out;
  for (auto n : registered_ops()) out.emplace_back(n);
  return out;
}

INSTANTIATE_TEST_SUITE_P(AllRegistered, EveryOp, ::testing::ValuesIn(op_names()));

// ---------------------------------------------------------------- adamw

TEST(AdamW, ZeroGradientWithoutDecayLeavesParameters) {
  std::mt19937_64 rng(12);
  ParameterSet<double> params;
  Td p = params.create("w", {3, 3}, Init::fan_in_uniform, rng);
  const std::vector<double> before = p.values();
  AdamW<double> opt({.lr = 1e-2, .weight_decay = 0.0});
  p.grad();
  for (int i = 0; i < 5; ++i) opt.step(params);
  EXPECT_EQ(p.values(), before);
  EXPECT_EQ(opt.state().step, 5u);
}

TEST(AdamW, SingleScalarMatchesHandComputedUpdate) {
  // p=0.5, g=0.2, lr=0.1, b1=0.9, b2=0.999, eps=1e-8, wd=0.01, first step:
  // p' = 0.5*(1-0.1*0.01) = 0.4995
  // m = 0.02, v = 0.00004; m_hat = 0.2, v_hat = 0.04 -> step = 0.2/(0.2+1e-8)
  // p'' = 0.4995 - 0.1*0.2/(0.2+1e-8)
  ParameterSet<double> params;
  Td p = Td::scalar(0.5, true);
  params.insert("p", p);
  p.grad()[0] = 0.2;
  AdamW<double> opt({.lr = 0.1, .beta1 = 0.9, .beta2 = 0.999, .epsilon = 1e-8, .weight_decay = 0.01});
  opt.step(params);
  const double expected = 0.4995 - 0.1 * 0.2 / (0.2 + 1e-8);
  EXPECT_NEAR(p[0], expected, 1e-15);
  EXPECT_NEAR(opt.state().slots[0].m[0], 0.02, 1e-17);
  EXPECT_NEAR(opt.state().slots[0].v[0], 0.00004, 1e-18);
}

TEST(AdamW, DecoupledDecayShrinksMagnitude) {
  ParameterSet<double> params;
  Td p = Td::from({2}, {1.5, -2.0}, true);
  params.insert("p", p);
  p.grad();
  AdamW<double> opt({.lr = 0.1, .weight_decay = 0.5});
  double prev0 = std::abs(p[0]);
  double prev1 = std::abs(p[1]);
  for (int i = 0; i < 3; ++i) {
    opt.step(params);
    EXPECT_LT(std::abs(p[0]), prev0);
    EXPECT_LT(std::abs(p[1]), prev1);
    prev0 = std::abs(p[0]);
    prev1 = std::abs(p[1]);
  }
}

TEST(AdamW, DeterministicBitwise) {
  auto run = [] {
    std::mt19937_64 rng(13);
    ParameterSet<double> params;
    Td w = params.create("w", {4, 4}, Init::fan_in_uniform, rng);
    AdamW<double> opt({.lr = 3e-3, .weight_decay = 0.01});
    for (int s = 0; s < 10; ++s) {
      auto g = w.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sin(double(i + s));
      opt.step(params);
    }
    return w.values();
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamW, ShapeMismatchIsRejected) {
  std::vector<double> p(3, 0.0), g(2, 0.0);
  AdamWSlot<double> slot{std::vector<double>(3, 0.0), std::vector<double>(3, 0.0)};
  EXPECT_THROW(adamw_update<double>(p, g, slot, {}, 1), DimensionError);
  std::vector<double> g3(3, 0.0);
  EXPECT_THROW(adamw_update<double>(p, g3, slot, {.lr = 0.0}, 1), ValidationError);
}

// ---------------------------------------------------------------- checkpoint

template <typename T>
void round_trip() {
  std::mt19937_64 rng(14);
  ParameterSet<T> params;
  params.create("layer.w", {7, 3}, Init::fan_in_uniform, rng);
  params.create("layer.b", {3}, Init::normal_small, rng);
  const auto path = std::filesystem::temp_directory_path() / ("cogsr_ckpt_" + std::to_string(sizeof(T)) + ".bin");
  save_checkpoint<T>(path, params.entries(), 4242);
  Checkpoint<T> loaded = load_checkpoint<T>(path);
  EXPECT_EQ(loaded.header.precision_bits, sizeof(T) * 8);
  EXPECT_EQ(loaded.header.seed, 4242u);
  ASSERT_EQ(loaded.entries.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(loaded.entries[i].first, params.entries()[i].first);
    EXPECT_EQ(loaded.entries[i].second.shape(), params.entries()[i].second.shape());
    EXPECT_EQ(loaded.entries[i].second.values(), params.entries()[i].second.values());
  }
  std::filesystem::remove(path);
}

TEST(Checkpoint, RoundTripIsValueExact) {
  round_trip<float>();
  round_trip<double>();
}

TEST(Checkpoint, PrecisionMismatchAndGarbageAreRejected) {
  const auto path = std::filesystem::temp_directory_path() / "cogsr_ckpt_mismatch.bin";
  save_checkpoint<float>(path, {{"x", Tensor<float>::scalar(1.0f)}}, 1);
  EXPECT_THROW(load_checkpoint<double>(path), ValidationError);
  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << "not a checkpoint";
  }
  EXPECT_THROW(load_checkpoint<float>(path), ValidationError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint<float>(path), IoError);
}

}  // namespace
}  // namespace cogsr::numerics
