// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "../support/oracles.hpp"
#include "ttstroke/domain.hpp"
#include "ttstroke/error.hpp"

using namespace ttstroke;

TEST_CASE("class set has eleven distinct ids and names in table order") {
  std::set<std::string_view> names;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const StrokeClass c = kAllClasses[i];
    CHECK(class_id(c) == i);
    CHECK(class_from_id(i) == c);
    names.insert(class_name(c));
  }
  CHECK(names.size() == 11);
  CHECK(class_name(StrokeClass::ForehandTopspin) == "ForehandTopspin");
  CHECK(class_name(StrokeClass::BackhandPush) == "BackhandPush");
  CHECK(class_name(StrokeClass::ForehandFlat) == "ForehandFlat");
  CHECK_THROWS_AS(class_from_id(11), UnknownClass);
}

TEST_CASE("class_from_name is case, space and underscore tolerant") {
  CHECK(class_from_name("backhand_push") == StrokeClass::BackhandPush);
  CHECK(class_id(class_from_name("backhand_push")) == 3);
  CHECK(class_from_name("Forehand Flat") == StrokeClass::ForehandFlat);
  CHECK(class_id(class_from_name("Forehand Flat")) == 10);
  CHECK(class_from_name("  FOREHAND-lob ") == StrokeClass::ForehandLob);
  CHECK_THROWS_AS(class_from_name("smash"), UnknownClass);
  CHECK_THROWS_AS(class_from_name(""), UnknownClass);
  for (StrokeClass c : kAllClasses) {
    CHECK(class_from_name(class_name(c)) == c);
    CHECK(class_from_name(display_name(c)) == c);
  }
  CHECK(display_name(StrokeClass::ForehandTopspin) == "Forehand Topspin");
}

TEST_CASE("validate_sequence accepts well-formed input") {
  std::mt19937_64 rng(3);
  const KeypointSequence seq = oracle::random_sequence(rng, 40);
  const ValidationResult r = validate_sequence(seq);
  CHECK(r.ok());
  CHECK(r == validate_sequence(seq));
}

TEST_CASE("validate_sequence locates out-of-bounds joints") {
  std::mt19937_64 rng(4);
  KeypointSequence seq = oracle::random_sequence(rng, 40);
  seq.frames[3].joints[coco::kRightWrist].x = -5.0;
  const ValidationResult r = validate_sequence(seq);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].frame == std::optional<std::size_t>(3));
  CHECK(r.violations[0].joint == std::optional<int>(10));
  CHECK(r.violations[0].reason == "out-of-bounds");
  CHECK(validate_sequence(seq, kOutOfBoundsTolerancePx).ok());
  seq.frames[3].joints[coco::kRightWrist].x = -5.5;
  CHECK_FALSE(validate_sequence(seq, kOutOfBoundsTolerancePx).ok());
}

TEST_CASE("validate_sequence rejects empty, non-finite and bad confidence") {
  KeypointSequence empty;
  const ValidationResult r = validate_sequence(empty);
  REQUIRE(r.violations.size() == 1);
  CHECK_FALSE(r.violations[0].frame.has_value());

  std::mt19937_64 rng(5);
  KeypointSequence seq = oracle::random_sequence(rng, 5);
  seq.frames[1].joints[0].y = std::nan("");
  seq.frames[2].joints[4].confidence = 1.5;
  const ValidationResult bad = validate_sequence(seq);
  CHECK(bad.violations.size() == 2);
  CHECK(bad.describe().find("frame 1, joint 0") != std::string::npos);

  seq = oracle::random_sequence(rng, 5);
  seq.resolution.width = 0;
  CHECK_FALSE(validate_sequence(seq).ok());
}

TEST_CASE("FeatureWindow enforces zero padding and mask bounds") {
  FeatureWindow::Storage data{};
  data[0] = 1.0f;
  CHECK_NOTHROW(FeatureWindow(data, 1));
  CHECK_THROWS_AS(FeatureWindow(data, 0), ValidationError);
  CHECK_THROWS_AS(FeatureWindow(data, 101), ValidationError);
  data[8 * 50] = 2.0f;
  CHECK_THROWS_AS(FeatureWindow(data, 50), ValidationError);
  CHECK_NOTHROW(FeatureWindow(data, 51));
}

TEST_CASE("Dataset class counts follow items") {
  Dataset d;
  std::mt19937_64 rng(1);
  d.add(oracle::random_window(rng, 10), StrokeClass::ForehandPush);
  d.add(oracle::random_window(rng, 10), StrokeClass::ForehandPush);
  d.add(oracle::random_window(rng, 10), StrokeClass::BackhandLob);
  CHECK(d.size() == 3);
  CHECK(d.class_counts()[2] == 2);
  CHECK(d.class_counts()[9] == 1);
  const Dataset copy(d.items());
  CHECK(copy.class_counts() == d.class_counts());
}

TEST_CASE("MPII frames map onto COCO joints") {
  std::array<JointPoint, kNumMpiiJoints> mpii{};
  for (std::size_t i = 0; i < kNumMpiiJoints; ++i) {
    mpii[i] = {static_cast<double>(i), 10.0 * static_cast<double>(i), 0.5};
  }
  const PoseFrame f = frame_from_mpii(mpii);
  CHECK(f.joints[coco::kRightWrist].x == 10.0);
  CHECK(f.joints[coco::kRightElbow].x == 11.0);
  CHECK(f.joints[coco::kRightShoulder].x == 12.0);
  CHECK(f.joints[coco::kLeftShoulder].x == 13.0);
  CHECK(f.joints[coco::kLeftWrist].x == 15.0);
  CHECK(f.joints[coco::kLeftEye].confidence == 0.0);
}
