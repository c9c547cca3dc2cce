// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ttstroke/error.hpp"

namespace ttstroke {

FlatVector flatten(const FeatureWindow& window) { return window.data(); }

FeatureWindow unflatten(const FlatVector& flat) {
  std::size_t mask_len = 1;
  for (std::size_t t = kWindowSteps; t-- > 0;) {
    bool zero = true;
    for (std::size_t f = 0; f < kFeatures; ++f) zero = zero && flat[t * kFeatures + f] == 0.0f;
    if (!zero) {
      mask_len = t + 1;
      break;
    }
  }
  return FeatureWindow(flat, mask_len);
}

double euclidean_distance(const FlatVector& a, const FlatVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kWindowSize; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

KnnIndex KnnIndex::build(const Dataset& data, std::size_t k) {
  KnnIndex index(k);
  for (const auto& item : data.items()) index.add(flatten(item.window), item.label);
  return index;
}

void KnnIndex::add(const FlatVector& point, StrokeClass label) {
  points_.push_back(point);
  labels_.push_back(label);
}

StrokeClass knn_classify(const KnnIndex& index, const FlatVector& query) {
  if (index.size() == 0) throw EmptyIndex();
  if (index.k() == 0) throw InvalidConfig("k must be >= 1");
  const std::size_t k = std::min(index.k(), index.size());

  // (distance, insertion index): lexicographic order gives the documented
  // neighbour tie-break.
  std::vector<std::pair<double, std::size_t>> dist(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    dist[i] = {euclidean_distance(index.point(i), query), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::array<std::size_t, kNumClasses> votes{};
  std::array<double, kNumClasses> dist_sum{};
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t c = class_id(index.label(dist[i].second));
    ++votes[c];
    dist_sum[c] += dist[i].first;
  }
  std::size_t best = kNumClasses;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (votes[c] == 0) continue;
    if (best == kNumClasses || votes[c] > votes[best]) {
      best = c;
      continue;
    }
    if (votes[c] == votes[best]) {
      // Equal counts, so comparing sums compares means.
      if (dist_sum[c] < dist_sum[best]) best = c;
    }
  }
  return class_from_id(best);
}

}  // namespace ttstroke
