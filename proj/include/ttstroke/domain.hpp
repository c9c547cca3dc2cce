// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ttstroke {

/// The closed label set, in the order the stroke table lists them.
enum class StrokeClass : std::uint8_t {
  ForehandTopspin = 0,
  BackhandTopspin = 1,
  ForehandPush = 2,
  BackhandPush = 3,
  ForehandBlock = 4,
  BackhandBlock = 5,
  ForehandFlick = 6,
  BackhandFlick = 7,
  ForehandLob = 8,
  BackhandLob = 9,
  ForehandFlat = 10,
};

inline constexpr std::size_t kNumClasses = 11;

inline constexpr std::array<StrokeClass, kNumClasses> kAllClasses = {
    StrokeClass::ForehandTopspin, StrokeClass::BackhandTopspin, StrokeClass::ForehandPush,
    StrokeClass::BackhandPush,    StrokeClass::ForehandBlock,   StrokeClass::BackhandBlock,
    StrokeClass::ForehandFlick,   StrokeClass::BackhandFlick,   StrokeClass::ForehandLob,
    StrokeClass::BackhandLob,     StrokeClass::ForehandFlat,
};

constexpr std::size_t class_id(StrokeClass c) { return static_cast<std::size_t>(c); }

/// Throws UnknownClass for ids outside 0..10.
StrokeClass class_from_id(std::size_t id);

/// Canonical CamelCase name, e.g. "ForehandTopspin".
std::string_view class_name(StrokeClass c);

/// Human-readable name, e.g. "Forehand Topspin".
std::string display_name(StrokeClass c);

/// Case-insensitive lookup that ignores whitespace, '_' and '-'.
/// "backhand_push", "Backhand Push" and "BACKHANDPUSH" all resolve.
StrokeClass class_from_name(std::string_view name);

enum class Handedness : std::uint8_t { Right, Left };

std::string_view handedness_name(Handedness h);

/// Pixel coordinates plus the pose estimator's confidence. Confidence is
/// carried for diagnostics only; nothing downstream consumes it.
struct JointPoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  bool operator==(const JointPoint&) const = default;
};

inline constexpr std::size_t kNumJoints = 17;

/// COCO keypoint indices. Image-left is the player's right side for a
/// camera facing the player.
namespace coco {
inline constexpr int kNose = 0;
inline constexpr int kLeftEye = 1;
inline constexpr int kRightEye = 2;
inline constexpr int kLeftEar = 3;
inline constexpr int kRightEar = 4;
inline constexpr int kLeftShoulder = 5;
inline constexpr int kRightShoulder = 6;
inline constexpr int kLeftElbow = 7;
inline constexpr int kRightElbow = 8;
inline constexpr int kLeftWrist = 9;
inline constexpr int kRightWrist = 10;
inline constexpr int kLeftHip = 11;
inline constexpr int kRightHip = 12;
inline constexpr int kLeftKnee = 13;
inline constexpr int kRightKnee = 14;
inline constexpr int kLeftAnkle = 15;
inline constexpr int kRightAnkle = 16;

/// (left, right) index pairs swapped by a horizontal mirror.
inline constexpr std::array<std::array<int, 2>, 8> kLeftRightPairs = {{
    {kLeftEye, kRightEye},
    {kLeftEar, kRightEar},
    {kLeftShoulder, kRightShoulder},
    {kLeftElbow, kRightElbow},
    {kLeftWrist, kRightWrist},
    {kLeftHip, kRightHip},
    {kLeftKnee, kRightKnee},
    {kLeftAnkle, kRightAnkle},
}};
}  // namespace coco

struct PoseFrame {
  std::array<JointPoint, kNumJoints> joints{};

  bool operator==(const PoseFrame&) const = default;
};

/// MPII (16 joints) to COCO slot mapping. Entry i is the MPII joint that fills
/// COCO slot i, or -1 where MPII has no counterpart.
inline constexpr std::size_t kNumMpiiJoints = 16;
extern const std::array<int, kNumJoints> kCocoFromMpii;

/// Builds a COCO-ordered frame from MPII output. Face slots are filled from the
/// MPII head-top joint with zero confidence.
PoseFrame frame_from_mpii(std::span<const JointPoint, kNumMpiiJoints> mpii);

struct Resolution {
  int width = 1280;
  int height = 720;

  bool operator==(const Resolution&) const = default;
};

struct KeypointSequence {
  std::vector<PoseFrame> frames;
  Handedness handedness = Handedness::Right;
  Resolution resolution;
  std::optional<StrokeClass> label;
  std::string source_id;
  /// Capture rate, when the producer recorded it.
  std::optional<double> fps;

  std::size_t length() const { return frames.size(); }
  bool operator==(const KeypointSequence&) const = default;
};

struct Violation {
  std::optional<std::size_t> frame;
  std::optional<int> joint;
  std::string reason;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
  bool operator==(const ValidationResult&) const = default;
};

/// Default slack for slightly out-of-frame estimator output when the caller
/// opts in to tolerance.
inline constexpr double kOutOfBoundsTolerancePx = 5.0;

/// Checks length, resolution, finiteness, confidence range and frame bounds.
/// Coordinates may exceed [0, width] x [0, height] by at most `tolerance_px`.
ValidationResult validate_sequence(const KeypointSequence& seq, double tolerance_px = 0.0);

inline constexpr std::size_t kWindowSteps = 100;
inline constexpr std::size_t kFeatures = 8;
inline constexpr std::size_t kWindowSize = kWindowSteps * kFeatures;

/// Feature column layout.
namespace feature {
inline constexpr std::size_t kWristX = 0;
inline constexpr std::size_t kWristY = 1;
inline constexpr std::size_t kElbowX = 2;
inline constexpr std::size_t kElbowY = 3;
inline constexpr std::size_t kRightShoulderX = 4;
inline constexpr std::size_t kRightShoulderY = 5;
inline constexpr std::size_t kLeftShoulderX = 6;
inline constexpr std::size_t kLeftShoulderY = 7;
}  // namespace feature

/// Fixed 100 x 8 model input, row-major (time-major). Rows at or beyond
/// mask_len are exactly zero.
class FeatureWindow {
 public:
  using Storage = std::array<float, kWindowSize>;

  /// All-zero window with mask_len = kWindowSteps.
  FeatureWindow() = default;

  /// Throws ValidationError if mask_len is outside 1..100 or a padded row is
  /// non-zero.
  FeatureWindow(const Storage& data, std::size_t mask_len);

  float at(std::size_t t, std::size_t f) const { return data_[t * kFeatures + f]; }
  std::span<const float, kFeatures> row(std::size_t t) const {
    return std::span<const float, kFeatures>(data_.data() + t * kFeatures, kFeatures);
  }
  const Storage& data() const { return data_; }
  std::size_t mask_len() const { return mask_len_; }

  bool operator==(const FeatureWindow&) const = default;

 private:
  Storage data_{};
  std::size_t mask_len_ = kWindowSteps;
};

struct LabeledWindow {
  FeatureWindow window;
  StrokeClass label;

  bool operator==(const LabeledWindow&) const = default;
};

using ClassCounts = std::array<std::size_t, kNumClasses>;

/// Labelled windows with per-class counts kept in step with the items.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledWindow> items);

  void add(FeatureWindow window, StrokeClass label);

  const std::vector<LabeledWindow>& items() const { return items_; }
  const LabeledWindow& operator[](std::size_t i) const { return items_[i]; }
  const ClassCounts& class_counts() const { return counts_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<LabeledWindow> items_;
  ClassCounts counts_{};
};

}  // namespace ttstroke
