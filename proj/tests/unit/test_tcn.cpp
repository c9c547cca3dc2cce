// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstring>

#include "../support/oracles.hpp"
#include "ttstroke/error.hpp"
#include "ttstroke/preprocess.hpp"
#include "ttstroke/tcn.hpp"

using namespace ttstroke;

namespace {

Tensor2D random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor2D t(rows, cols);
  for (double& v : t.values) v = n(rng);
  return t;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Dataset small_dataset(std::size_t per_class, std::uint64_t seed) {
  SynthConfig sc;
  sc.per_class_count = per_class;
  sc.seed = seed;
  Dataset d;
  for (const auto& s : generate(sc)) d.add(preprocess(s), *s.label);
  return d;
}

}  // namespace

TEST_CASE("conv1d output length") {
  CHECK(conv_output_steps(100, 7, 2) == 47);
  CHECK(conv_output_steps(47, 3, 2) == 23);
  CHECK(conv_output_steps(5, 7, 1) == 0);
  CHECK(conv_output_steps(7, 7, 3) == 1);
}

TEST_CASE("conv1d with an identity kernel is the identity") {
  std::mt19937_64 rng(1);
  const Tensor2D x = random_tensor(rng, 12, 5);
  std::vector<double> w(25, 0.0);
  for (std::size_t c = 0; c < 5; ++c) w[c * 5 + c] = 1.0;
  const std::vector<double> b(5, 0.0);
  CHECK(conv1d_forward(x, w, b, 1, 1) == x);
}

TEST_CASE("conv1d matches a triple-loop oracle") {
  std::mt19937_64 rng(2);
  for (auto [steps, cin, cout, kernel, stride] :
       std::vector<std::array<std::size_t, 5>>{{10, 2, 3, 3, 1}, {10, 2, 2, 3, 2}, {31, 4, 5, 5, 3},
                                               {7, 3, 1, 7, 1}}) {
    const Tensor2D x = random_tensor(rng, steps, cin);
    const auto w = random_vec(rng, kernel * cin * cout);
    const auto b = random_vec(rng, cout);
    std::vector<std::vector<double>> rows(steps, std::vector<double>(cin));
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t c = 0; c < cin; ++c) rows[t][c] = x.at(t, c);
    }
    const auto ref = oracle::conv1d(rows, w, b, kernel, stride);
    const Tensor2D y = conv1d_forward(x, w, b, kernel, stride);
    REQUIRE(y.rows == ref.size());
    REQUIRE(y.cols == cout);
    for (std::size_t t = 0; t < y.rows; ++t) {
      for (std::size_t o = 0; o < cout; ++o) CHECK(std::abs(y.at(t, o) - ref[t][o]) < 1e-10);
    }
  }
}

TEST_CASE("conv1d rejects inconsistent shapes") {
  std::mt19937_64 rng(3);
  const Tensor2D x = random_tensor(rng, 10, 2);
  CHECK_THROWS_AS(conv1d_forward(x, random_vec(rng, 3 * 3 * 4), random_vec(rng, 4), 3, 1),
                  ShapeMismatch);
  CHECK_THROWS_AS(conv1d_forward(x, random_vec(rng, 3 * 2 * 4), random_vec(rng, 3), 3, 1),
                  ShapeMismatch);
  CHECK_THROWS_AS(conv1d_forward(x, random_vec(rng, 11 * 2 * 1), random_vec(rng, 1), 11, 1),
                  ShapeMismatch);
}

TEST_CASE("layer_norm normalises each step") {
  std::mt19937_64 rng(4);
  const Tensor2D x = random_tensor(rng, 20, 16);
  const std::vector<double> g(16, 1.0), b(16, 0.0);
  const Tensor2D y = layer_norm(x, g, b);
  for (std::size_t r = 0; r < 20; ++r) {
    // Expected variance of the output is v / (v + eps) for input variance v.
    double in_mean = 0.0, in_var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) in_mean += x.at(r, c) / 16.0;
    for (std::size_t c = 0; c < 16; ++c) in_var += (x.at(r, c) - in_mean) * (x.at(r, c) - in_mean) / 16.0;
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) mean += y.at(r, c);
    mean /= 16.0;
    for (std::size_t c = 0; c < 16; ++c) var += (y.at(r, c) - mean) * (y.at(r, c) - mean);
    var /= 16.0;
    CHECK(std::abs(mean) < 1e-7);
    CHECK(var == doctest::Approx(in_var / (in_var + kLayerNormEpsilon)).epsilon(1e-12));
  }
}

TEST_CASE("layer_norm worked examples") {
  Tensor2D constant(1, 4);
  constant.values = {3, 3, 3, 3};
  const std::vector<double> g(4, 1.0), b(4, 0.0);
  for (double v : layer_norm(constant, g, b).values) CHECK(v == 0.0);

  Tensor2D ramp(1, 4);
  ramp.values = {1, 2, 3, 4};
  // mean 2.5, variance 1.25
  const double s = std::sqrt(1.25 + 1e-5);
  const Tensor2D y = layer_norm(ramp, g, b);
  const std::array<double, 4> expect = {-1.3416, -0.4472, 0.4472, 1.3416};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(y.values[i] - expect[i]) < 1e-3);
    CHECK(y.values[i] == doctest::Approx((ramp.values[i] - 2.5) / s).epsilon(1e-12));
  }
  const std::vector<double> g2 = {2, 2, 2, 2}, b2 = {1, 1, 1, 1};
  const Tensor2D z = layer_norm(ramp, g2, b2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(z.values[i] == doctest::Approx(2 * y.values[i] + 1));

  Tensor2D narrow(2, 1);
  CHECK_THROWS_AS(layer_norm(narrow, std::vector<double>{1.0}, std::vector<double>{0.0}),
                  ShapeMismatch);
}

TEST_CASE("param_count") {
  const ArchSpec def;
  CHECK(param_count(def) == 116235);
  // Independent tally over the instantiated tensors.
  const TcnModel m = TcnModel::initialize(def, 1);
  std::size_t tally = 0;
  for (const auto& slot : m.layout()) tally += m.tensor(slot.name).size();
  CHECK(tally == param_count(def));
  CHECK(m.param_count() == tally);
  // And by hand: conv 7*8*64+64, norms 2*64 each, three 3*64*64+64 convs,
  // 9 steps * 64 channels into 128 hidden, 128 into 11.
  CHECK(param_count(def) == (7 * 8 * 64 + 64) + 2 * 128 + 3 * (3 * 64 * 64 + 64) +
                                (9 * 64 * 128 + 128) + (128 * 11 + 11));
  CHECK(param_count(def) != kPublishedTcnParams);

  ArchSpec one;
  one.entry = {8, 1, 1};
  one.body.clear();
  const TcnModel m1 = TcnModel::initialize(one, 1);
  CHECK(m1.tensor("conv0.weight").size() + m1.tensor("conv0.bias").size() == 72);

  ArchSpec wide = def;
  wide.dense_hidden *= 2;
  CHECK(param_count(wide) > param_count(def));

  ArchSpec each = def;
  each.norm_after_each_body_conv = true;
  CHECK(param_count(each) == param_count(def) + 2 * 128);
}

TEST_CASE("ArchSpec validation") {
  ArchSpec a;
  CHECK_NOTHROW(a.validate());
  CHECK(a.final_steps() == 9);
  CHECK(a.flattened_size() == 576);
  a.num_classes = 10;
  CHECK_THROWS_AS(a.validate(), InvalidConfig);
  a = {};
  a.body[0].stride = 0;
  CHECK_THROWS_AS(a.validate(), InvalidConfig);
  a = {};
  a.body.push_back({64, 50, 1});
  CHECK_THROWS_AS(a.validate(), InvalidConfig);
  a = {};
  a.entry.out_channels = 0;
  CHECK_THROWS_AS(a.validate(), InvalidConfig);
}

TEST_CASE("forward yields a strictly positive distribution") {
  std::mt19937_64 rng(5);
  const TcnModel m = TcnModel::initialize(ArchSpec{}, 9);
  for (int i = 0; i < 20; ++i) {
    const FeatureWindow w = oracle::random_window(rng, 1 + rng() % 100);
    const Probabilities p = forward(m, w);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
    const Probabilities again = forward(m, w);
    CHECK(std::memcmp(p.data(), again.data(), sizeof(p)) == 0);
  }
}

TEST_CASE("fresh models are not saturated") {
  const Dataset strokes = small_dataset(1, 3);
  std::mt19937_64 rng(6);
  double worst = 0.0, lowest = 1.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const TcnModel m = TcnModel::initialize(ArchSpec{}, seed);
    std::vector<FeatureWindow> inputs = {strokes[seed % strokes.size()].window,
                                         oracle::random_window(rng, 40)};
    for (const auto& w : inputs) {
      const Probabilities p = forward(m, w);
      const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
      worst = std::max(worst, *hi / *lo);
      lowest = std::min(lowest, *lo);
    }
  }
  MESSAGE("largest max/min probability ratio over 100 inits: " << worst);
  CHECK(lowest > 1e-3);
}

TEST_CASE("cross_entropy closed forms") {
  Probabilities uniform;
  uniform.fill(1.0 / 11.0);
  CHECK(cross_entropy(uniform, StrokeClass::BackhandLob) == doctest::Approx(std::log(11.0)));
  CHECK(cross_entropy(uniform, StrokeClass::BackhandLob) == doctest::Approx(2.3979).epsilon(1e-4));
  Probabilities sure{};
  sure[3] = 1.0;
  CHECK(cross_entropy(sure, StrokeClass::BackhandPush) == 0.0);
  Probabilities half{};
  half[0] = 0.5;
  half[1] = 0.5;
  CHECK(cross_entropy(half, StrokeClass::ForehandTopspin) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(half, StrokeClass::ForehandFlat) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("analytic gradients match central differences") {
  for (bool each : {false, true}) {
    ArchSpec arch = oracle::tiny_arch();
    arch.norm_after_each_body_conv = each;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto r = oracle::seeded_gradient_check(arch, seed);
      INFO("norm_after_each=" << each << " seed=" << seed << " draws=" << r.draws
                              << " worst index=" << r.result.worst_index);
      CHECK(r.result.checked == param_count(arch));
      CHECK(r.result.fd_inconsistency < oracle::kFdConsistency);
      CHECK(r.result.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("no gradient at a perfect prediction") {
  TcnModel m = TcnModel::initialize(oracle::tiny_arch(), 2);
  auto bias = m.mutable_tensor("dense2.bias");
  bias[4] = 1000.0;
  std::mt19937_64 rng(7);
  const FeatureWindow w = oracle::random_window(rng, 30);
  REQUIRE(forward(m, w)[4] == 1.0);
  for (double g : backward(m, w, StrokeClass::ForehandBlock)) CHECK(g == 0.0);
}

TEST_CASE("gradients add over repeated examples") {
  const TcnModel m = TcnModel::initialize(oracle::tiny_arch(), 3);
  std::mt19937_64 rng(8);
  const FeatureWindow w = oracle::random_window(rng, 50);
  const auto single = backward(m, w, StrokeClass::BackhandFlick);
  std::vector<double> sum(single.size(), 0.0);
  accumulate_gradient(m, w, StrokeClass::BackhandFlick, sum);
  accumulate_gradient(m, w, StrokeClass::BackhandFlick, sum);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    CHECK(sum[i] == doctest::Approx(2.0 * single[i]).epsilon(1e-12));
  }
  const TcnModel copy = m;
  (void)backward(m, w, StrokeClass::BackhandFlick);
  CHECK(copy == m);
}

TEST_CASE("argmax and classify") {
  Probabilities one_hot{};
  one_hot[4] = 1.0;
  const Prediction p = argmax(one_hot);
  CHECK(p.label == StrokeClass::ForehandBlock);
  CHECK(p.confidence == 1.0);

  Probabilities uniform;
  uniform.fill(1.0 / 11.0);
  CHECK(argmax(uniform).label == StrokeClass::ForehandTopspin);
  CHECK(argmax(uniform).confidence == doctest::Approx(1.0 / 11.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    Probabilities logits;
    for (double& v : logits) v = u(rng);
    Probabilities shifted;
    for (std::size_t i = 0; i < kNumClasses; ++i) shifted[i] = std::exp(3.0 * logits[i]) + 7.0;
    CHECK(argmax(logits).label == argmax(shifted).label);
  }

  // Zero weights and biases give a uniform output.
  TcnModel zero = TcnModel::initialize(oracle::tiny_arch(), 1);
  for (double& v : zero.mutable_parameters()) v = 0.0;
  const Prediction c = classify(zero, oracle::random_window(rng, 40));
  CHECK(c.label == StrokeClass::ForehandTopspin);
  CHECK(c.confidence == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("initialisation statistics") {
  const TcnModel m = TcnModel::initialize(ArchSpec{}, 21);
  auto stats = [&](std::string_view name) {
    const auto t = m.tensor(name);
    double mean = 0.0, var = 0.0;
    for (double v : t) mean += v;
    mean /= static_cast<double>(t.size());
    for (double v : t) var += (v - mean) * (v - mean);
    return std::pair{mean, var / static_cast<double>(t.size())};
  };
  // He variance for ReLU layers, 1/fan_in for the entry conv and softmax layer.
  CHECK(stats("conv1.weight").second == doctest::Approx(2.0 / (3 * 64)).epsilon(0.05));
  CHECK(stats("dense1.weight").second == doctest::Approx(2.0 / 576).epsilon(0.05));
  CHECK(stats("conv0.weight").second == doctest::Approx(1.0 / (7 * 8)).epsilon(0.1));
  CHECK(stats("dense2.weight").second == doctest::Approx(1.0 / 128).epsilon(0.15));
  for (double v : m.tensor("norm0.gain")) CHECK(v == 1.0);
  for (double v : m.tensor("dense1.bias")) CHECK(v == 0.0);
  CHECK(TcnModel::initialize(ArchSpec{}, 21) == m);
  CHECK_FALSE(TcnModel::initialize(ArchSpec{}, 22) == m);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  CHECK(optimizer_from_name("sgd") == OptimizerKind::Sgd);
  CHECK_THROWS_AS(optimizer_from_name("rmsprop"), InvalidConfig);
}

TEST_CASE("one small step lowers the loss on a single example") {
  std::mt19937_64 rng(10);
  Dataset one;
  one.add(oracle::random_window(rng, 40), StrokeClass::ForehandLob);
  const TcnModel m = TcnModel::initialize(oracle::tiny_arch(), 4);
  for (OptimizerKind opt : {OptimizerKind::Sgd, OptimizerKind::Adam}) {
    TrainConfig c;
    c.epochs = 1;
    c.optimizer = opt;
    // Adam moves every weight by about lr at once; pixel-scale inputs need a tiny lr.
    c.learning_rate = 1e-7;
    const TrainResult r = train(m, one, Dataset{}, c);
    const double before = cross_entropy(forward(m, one[0].window), StrokeClass::ForehandLob);
    const double after = cross_entropy(forward(r.model, one[0].window), StrokeClass::ForehandLob);
    INFO(optimizer_name(opt));
    CHECK(after < before);
    CHECK(r.history.size() == 1);
    CHECK(r.best_epoch == 1);
  }
}

TEST_CASE("training is deterministic and keeps the best epoch") {
  const Dataset data = small_dataset(6, 4);
  const Dataset val = small_dataset(2, 5);
  const TcnModel init = TcnModel::initialize(oracle::tiny_arch(), 5);
  TrainConfig c;
  c.epochs = 4;
  c.batch_size = 8;
  const TrainResult a = train(init, data, val, c);
  const TrainResult b = train(init, data, val, c);
  CHECK(a.model == b.model);
  CHECK(a.history.size() == 4);
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& e : a.history) {
    CHECK(std::isfinite(e.train_loss));
    if (e.val_accuracy > best) {
      best = e.val_accuracy;
      best_epoch = e.epoch;
    }
  }
  CHECK(a.best_epoch == best_epoch);
  CHECK(accuracy(a.model, val) == doctest::Approx(best).epsilon(1e-12));
  // Stored parameters are float32-representable.
  for (double v : a.model.parameters()) CHECK(static_cast<double>(static_cast<float>(v)) == v);

  c.seed = 99;
  const TrainResult other = train(init, data, val, c);
  CHECK_FALSE(other.model == a.model);
}

TEST_CASE("freeze_conv only moves the dense head") {
  const Dataset data = small_dataset(2, 6);
  const TcnModel init = TcnModel::initialize(oracle::tiny_arch(), 6);
  TrainConfig c;
  c.epochs = 1;
  c.freeze_conv = true;
  const TrainResult r = train(init, data, Dataset{}, c);
  CHECK(std::ranges::equal(r.model.tensor("conv0.weight"), init.tensor("conv0.weight")));
  CHECK(std::ranges::equal(r.model.tensor("norm1.gain"), init.tensor("norm1.gain")));
  CHECK_FALSE(std::ranges::equal(r.model.tensor("dense1.weight"), init.tensor("dense1.weight")));
}

TEST_CASE("training aborts on non-finite values") {
  const Dataset data = small_dataset(1, 7);
  TcnModel init = TcnModel::initialize(oracle::tiny_arch(), 7);
  init.mutable_tensor("dense2.bias")[0] = std::nan("");
  TrainConfig c;
  c.epochs = 2;
  try {
    (void)train(init, data, Dataset{}, c);
    FAIL("expected NanDetected");
  } catch (const NanDetected& e) {
    CHECK(e.epoch() == 1);
    CHECK(e.batch() == 0);
  }
  CHECK_THROWS_AS(train(TcnModel::initialize(oracle::tiny_arch(), 7), Dataset{}, Dataset{}, c),
                  InvalidConfig);
}
