// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ttstroke/domain.hpp"

namespace ttstroke {

/// Window-13, order-2 Savitzky-Golay smoother kept as integer numerators over
/// a common divisor so its moment conditions can be checked exactly.
struct SavgolKernel {
  static constexpr std::size_t kWindow = 13;
  static constexpr int kHalf = 6;
  static constexpr int kPolyOrder = 2;

  std::array<int, kWindow> numerators = {-11, 0, 9, 16, 21, 24, 25, 24, 21, 16, 9, 0, -11};
  int divisor = 143;

  /// Coefficient at offset -6..6.
  double coefficient(int offset) const {
    return static_cast<double>(numerators[static_cast<std::size_t>(offset + kHalf)]) / divisor;
  }
};

/// How samples closer than half a window to either end are produced.
enum class EdgeMode {
  Reflect,    ///< mirror about the end sample (x[-k] = x[k])
  Replicate,  ///< repeat the end sample
  Passthrough ///< copy the raw sample unchanged
};

enum class OverlongPolicy {
  TruncateHead,  ///< keep the last frames
  TruncateTail,  ///< keep the first frames
};

std::string_view edge_mode_name(EdgeMode m);
EdgeMode edge_mode_from_name(std::string_view name);
std::string_view overlong_policy_name(OverlongPolicy p);
OverlongPolicy overlong_policy_from_name(std::string_view name);

/// Keypoint indices of the four tracked joints for a right-handed player.
struct JointMap {
  int wrist = coco::kRightWrist;
  int elbow = coco::kRightElbow;
  int right_shoulder = coco::kRightShoulder;
  int left_shoulder = coco::kLeftShoulder;

  std::array<int, 4> indices() const { return {wrist, elbow, right_shoulder, left_shoulder}; }
  bool operator==(const JointMap&) const = default;
};

struct PreprocessConfig {
  /// Real frames kept; the window itself is always 100 rows.
  std::size_t target_len = kWindowSteps;
  EdgeMode edge_mode = EdgeMode::Reflect;
  OverlongPolicy overlong_policy = OverlongPolicy::TruncateTail;
  JointMap joint_map;
  /// Disabled only for the filter ablation.
  bool smooth = true;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const PreprocessConfig&) const = default;
};

using FeatureRow = std::array<double, kFeatures>;
using FeatureRows = std::vector<FeatureRow>;

/// Output length equals input length. Indices 6..T-7 are the plain kernel
/// convolution; the rest follow `edge_mode`. Throws NonFinite.
std::vector<double> savgol_smooth(std::span<const double> signal,
                                  const SavgolKernel& kernel = {},
                                  EdgeMode edge_mode = EdgeMode::Reflect);

/// x -> width - x on every joint, left/right labels swapped and handedness
/// toggled. An involution.
KeypointSequence mirror_x(const KeypointSequence& seq);

/// Projects each frame onto the 8 feature columns, in pixels.
FeatureRows select_joints(const KeypointSequence& seq, const JointMap& joint_map = {});

/// Pads with trailing zero rows or truncates per `config.overlong_policy`.
FeatureWindow shape_window(const FeatureRows& rows, const PreprocessConfig& config = {});

/// Mirror (left-handed only), select, smooth each channel, shape.
FeatureWindow preprocess(const KeypointSequence& seq, const PreprocessConfig& config = {});

}  // namespace ttstroke
