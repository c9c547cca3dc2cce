// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "../support/oracles.hpp"
#include "ttstroke/baseline.hpp"
#include "ttstroke/error.hpp"
#include "ttstroke/eval.hpp"
#include "ttstroke/preprocess.hpp"
#include "ttstroke/synth.hpp"

using namespace ttstroke;

TEST_CASE("generate yields per_class_count labelled sequences per class") {
  SynthConfig c;
  c.per_class_count = 10;
  const auto seqs = generate(c);
  REQUIRE(seqs.size() == 110);
  ClassCounts counts{};
  for (const auto& s : seqs) {
    REQUIRE(s.label.has_value());
    ++counts[class_id(*s.label)];
    CHECK(validate_sequence(s).ok());
    CHECK(s.frames.size() >= 15);
    CHECK(s.frames.size() <= 100);
  }
  for (std::size_t n : counts) CHECK(n == 10);
}

TEST_CASE("generation is a pure function of the config") {
  SynthConfig c;
  c.per_class_count = 5;
  CHECK(generate(c) == generate(c));
  SynthConfig d = c;
  d.seed = 43;
  CHECK_FALSE(generate(c) == generate(d));
}

TEST_CASE("noiseless wrists lie exactly on the per-sequence template curve") {
  SynthConfig c;
  c.per_class_count = 8;
  c.noise_std = 0.0;
  c.swap_prob = 0.0;
  c.left_handed_fraction = 0.5;
  const auto seqs = generate(c);
  CHECK(seqs == generate(c));
  const auto templates = default_templates();
  std::size_t lefties = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto& tpl = templates[class_id(*seqs[i].label)];
    const SequencePlan plan = plan_sequence(c, tpl, i);
    REQUIRE(plan.frames == seqs[i].frames.size());
    const bool left = seqs[i].handedness == Handedness::Left;
    CHECK(left == plan.left_handed);
    lefties += left;
    const int wrist = left ? coco::kLeftWrist : coco::kRightWrist;
    for (std::size_t t = 0; t < plan.frames; ++t) {
      const Point2 expect = plan.instance.wrist_at(stroke_phase(t, plan.frames));
      const JointPoint& got = seqs[i].frames[t].joints[static_cast<std::size_t>(wrist)];
      const double x = left ? c.resolution.width - expect.x : expect.x;
      CHECK(got.x == x);
      CHECK(got.y == expect.y);
    }
  }
  CHECK(lefties > 0);
  CHECK(lefties < seqs.size());
}

TEST_CASE("zero style variation reproduces the templates") {
  SynthConfig c;
  c.style_variation = 0.0;
  const auto templates = default_templates();
  for (std::size_t i = 0; i < 5; ++i) {
    const SequencePlan plan = plan_sequence(c, templates[3], i);
    CHECK(plan.instance.wrist_path == templates[3].wrist_path);
    CHECK(plan.instance.right_shoulder == templates[3].right_shoulder);
  }
}

TEST_CASE("templates keep the wrist on their designated side") {
  for (const auto& t : default_templates()) {
    CHECK_NOTHROW(t.validate());
    int on_side = 0;
    const int n = 101;
    for (int i = 0; i < n; ++i) {
      const double x = t.wrist_at(static_cast<double>(i) / (n - 1)).x;
      // Right-handed player facing the camera: dominant side is image-left.
      const bool forehand_side = x < t.midline();
      on_side += (t.side == StrokeSide::ForehandSide) == forehand_side;
    }
    INFO(class_name(t.stroke));
    CHECK(on_side >= 0.7 * n);
    CHECK(t.min_frames >= 15);
    CHECK(t.max_frames <= 100);
  }
}

TEST_CASE("smoothing pulls noisy wrists toward the template") {
  SynthConfig c;
  c.per_class_count = 10;
  c.noise_std = 3.0;
  const auto seqs = generate(c);
  const auto templates = default_templates();
  double raw_sq = 0.0, smooth_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < seqs.size() && i < 110; ++i) {
    const SequencePlan plan = plan_sequence(c, templates[class_id(*seqs[i].label)], i);
    const KeypointSequence right =
        seqs[i].handedness == Handedness::Left ? mirror_x(seqs[i]) : seqs[i];
    const FeatureRows raw = select_joints(right);
    const FeatureWindow smooth = preprocess(seqs[i]);
    for (std::size_t t = 0; t < plan.frames; ++t) {
      const Point2 truth = plan.instance.wrist_at(stroke_phase(t, plan.frames));
      const double rx = raw[t][feature::kWristX] - truth.x, ry = raw[t][feature::kWristY] - truth.y;
      const double sx = smooth.at(t, feature::kWristX) - truth.x;
      const double sy = smooth.at(t, feature::kWristY) - truth.y;
      raw_sq += rx * rx + ry * ry;
      smooth_sq += sx * sx + sy * sy;
      ++n;
    }
  }
  MESSAGE("wrist MSE raw " << raw_sq / n << ", smoothed " << smooth_sq / n);
  CHECK(smooth_sq < raw_sq);
}

TEST_CASE("default synthetic task is separable by knn") {
  const auto seqs = generate(SynthConfig{});
  Dataset d;
  for (const auto& s : seqs) d.add(preprocess(s), *s.label);
  const Split parts = split(d, SplitSpec{});
  const KnnIndex index = KnnIndex::build(parts.train, 3);
  const EvalReport r = evaluate(
      [&](const FeatureWindow& w) { return knn_classify(index, flatten(w)); }, parts.val);
  MESSAGE("knn validation accuracy " << r.overall_accuracy);
  CHECK(r.overall_accuracy >= 0.90);
}

TEST_CASE("config validation") {
  SynthConfig c;
  CHECK_NOTHROW(c.validate());
  c.noise_std = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.swap_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.left_handed_fraction = -0.1;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.style_variation = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  auto templates = default_templates();
  CHECK_THROWS_AS(generate(SynthConfig{}, std::span(templates).first(10)), InvalidConfig);
  templates[1] = templates[0];
  CHECK_THROWS_AS(generate(SynthConfig{}, templates), InvalidConfig);
}

TEST_CASE("resolution scales the output") {
  SynthConfig c;
  c.per_class_count = 3;
  c.resolution = {640, 360};
  for (const auto& s : generate(c)) {
    CHECK(s.resolution == Resolution{640, 360});
    CHECK(validate_sequence(s).ok());
  }
}

TEST_CASE("distort_player_style") {
  SynthConfig c;
  c.per_class_count = 4;
  const auto seqs = generate(c);
  CHECK(distort_player_style(seqs, StrokeClass::ForehandPush, StyleWarp{}) == seqs);

  KeypointSequence forty;
  forty.label = StrokeClass::ForehandPush;
  forty.frames.resize(40);
  for (std::size_t t = 0; t < 40; ++t) {
    for (auto& j : forty.frames[t].joints) j = {10.0 + static_cast<double>(t), 300.0, 1.0};
  }
  const auto stretched = distort_player_style({forty}, StrokeClass::ForehandPush, {1.4, 0, 0});
  REQUIRE(stretched[0].frames.size() == 56);
  CHECK(stretched[0].frames.front().joints[0].x == 10.0);
  CHECK(stretched[0].frames.back().joints[0].x == doctest::Approx(49.0));
  // Linear path stays linear.
  for (std::size_t j = 0; j < 56; ++j) {
    CHECK(stretched[0].frames[j].joints[0].x ==
          doctest::Approx(10.0 + 39.0 * static_cast<double>(j) / 55.0));
  }

  const auto moved = distort_player_style(seqs, StrokeClass::BackhandLob, {1.0, 30, -20});
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].label != StrokeClass::BackhandLob) {
      CHECK(moved[i] == seqs[i]);
      continue;
    }
    CHECK(validate_sequence(moved[i]).ok());
    CHECK_FALSE(moved[i] == seqs[i]);
  }

  CHECK_THROWS_AS(distort_player_style(seqs, StrokeClass::ForehandPush, {0.5, 0, 0}),
                  InvalidConfig);
  CHECK_THROWS_AS(distort_player_style(seqs, StrokeClass::ForehandPush, {1.0, 121, 0}),
                  InvalidConfig);
}
