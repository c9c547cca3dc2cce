// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ttstroke/domain.hpp"

namespace ttstroke {

/// A window with the time axis flattened away: element (t, f) sits at 8t + f.
using FlatVector = std::array<float, kWindowSize>;

FlatVector flatten(const FeatureWindow& window);

/// Inverse of flatten. `mask_len` is recovered as one past the last non-zero
/// row (at least 1).
FeatureWindow unflatten(const FlatVector& flat);

/// Euclidean distance in raw pixel space.
double euclidean_distance(const FlatVector& a, const FlatVector& b);

/// Brute-force k-nearest-neighbour classifier over flattened windows.
class KnnIndex {
 public:
  explicit KnnIndex(std::size_t k = 3) : k_(k) {}

  /// Builds from a dataset, preserving item order.
  static KnnIndex build(const Dataset& data, std::size_t k = 3);

  void add(const FlatVector& point, StrokeClass label);

  std::size_t k() const { return k_; }
  std::size_t size() const { return labels_.size(); }
  const FlatVector& point(std::size_t i) const { return points_[i]; }
  StrokeClass label(std::size_t i) const { return labels_[i]; }

 private:
  std::size_t k_;
  std::vector<FlatVector> points_;
  std::vector<StrokeClass> labels_;
};

/// Majority vote among the k nearest points (k clamped to the index size).
/// Vote ties go to the class with the smaller mean neighbour distance, then the
/// lower class id; equidistant neighbours are ranked by insertion order.
/// Throws EmptyIndex, or InvalidConfig when k is 0.
StrokeClass knn_classify(const KnnIndex& index, const FlatVector& query);

}  // namespace ttstroke
