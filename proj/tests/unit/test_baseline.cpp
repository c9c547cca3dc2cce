// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numeric>

#include "../support/oracles.hpp"
#include "ttstroke/baseline.hpp"
#include "ttstroke/error.hpp"

using namespace ttstroke;

namespace {

FlatVector point_at(float x0, float x1) {
  FlatVector v{};
  v[0] = x0;
  v[1] = x1;
  return v;
}

}  // namespace

TEST_CASE("flatten is time-major") {
  FeatureWindow::Storage data{};
  for (std::size_t f = 0; f < 8; ++f) data[f] = static_cast<float>(f + 1);
  const FeatureWindow w(data, 1);
  const FlatVector v = flatten(w);
  for (std::size_t i = 0; i < 8; ++i) CHECK(v[i] == static_cast<float>(i + 1));
  for (std::size_t i = 8; i < 800; ++i) CHECK(v[i] == 0.0f);

  CHECK(flatten(FeatureWindow{}) == FlatVector{});

  std::mt19937_64 rng(1);
  const FeatureWindow r = oracle::random_window(rng, 37);
  const FlatVector rv = flatten(r);
  for (std::size_t t = 0; t < 100; ++t) {
    for (std::size_t f = 0; f < 8; ++f) CHECK(rv[8 * t + f] == r.at(t, f));
  }
  CHECK(unflatten(rv) == r);
}

TEST_CASE("euclidean distance is a metric on samples") {
  std::mt19937_64 rng(2);
  const FlatVector a = flatten(oracle::random_window(rng, 20));
  const FlatVector b = flatten(oracle::random_window(rng, 30));
  CHECK(euclidean_distance(a, a) == 0.0);
  CHECK(euclidean_distance(a, b) == euclidean_distance(b, a));
  CHECK(euclidean_distance(point_at(3, 0), point_at(0, 4)) == doctest::Approx(5.0));
}

TEST_CASE("knn worked examples") {
  KnnIndex one(1);
  one.add(point_at(0, 0), StrokeClass::BackhandBlock);
  one.add(point_at(10, 0), StrokeClass::ForehandFlick);
  CHECK(knn_classify(one, point_at(10, 0)) == StrokeClass::ForehandFlick);

  KnnIndex three(3);
  three.add(point_at(0, 0), StrokeClass::ForehandLob);   // A
  three.add(point_at(1, 0), StrokeClass::ForehandLob);   // A
  three.add(point_at(0.5, 0), StrokeClass::BackhandLob); // B, nearest
  three.add(point_at(50, 0), StrokeClass::BackhandLob);
  CHECK(knn_classify(three, point_at(0.5, 0)) == StrokeClass::ForehandLob);
}

TEST_CASE("knn vote ties fall to the smaller mean distance, then the lower id") {
  KnnIndex two(2);
  two.add(point_at(0, 0), StrokeClass::ForehandFlat);
  two.add(point_at(3, 0), StrokeClass::BackhandTopspin);
  CHECK(knn_classify(two, point_at(2, 0)) == StrokeClass::BackhandTopspin);

  KnnIndex tie(2);
  tie.add(point_at(-1, 0), StrokeClass::BackhandPush);
  tie.add(point_at(1, 0), StrokeClass::ForehandPush);
  CHECK(knn_classify(tie, point_at(0, 0)) == StrokeClass::ForehandPush);

  // Equal distances: insertion order picks the neighbours.
  KnnIndex order(1);
  order.add(point_at(1, 0), StrokeClass::ForehandFlat);
  order.add(point_at(-1, 0), StrokeClass::ForehandTopspin);
  CHECK(knn_classify(order, point_at(0, 0)) == StrokeClass::ForehandFlat);
}

TEST_CASE("knn errors and k clamping") {
  const KnnIndex empty(3);
  CHECK_THROWS_AS(knn_classify(empty, FlatVector{}), EmptyIndex);
  KnnIndex zero(0);
  zero.add(FlatVector{}, StrokeClass::ForehandTopspin);
  CHECK_THROWS_AS(knn_classify(zero, FlatVector{}), InvalidConfig);
  KnnIndex big(5);
  big.add(point_at(1, 1), StrokeClass::BackhandLob);
  CHECK(knn_classify(big, FlatVector{}) == StrokeClass::BackhandLob);
}

TEST_CASE("knn matches a full-sort oracle") {
  std::mt19937_64 rng(3);
  std::vector<FlatVector> points;
  std::vector<StrokeClass> labels;
  KnnIndex index(3);
  for (int i = 0; i < 200; ++i) {
    const FlatVector p = flatten(oracle::random_window(rng, 1 + rng() % 100));
    const StrokeClass c = class_from_id(rng() % kNumClasses);
    points.push_back(p);
    labels.push_back(c);
    index.add(p, c);
  }
  for (int q = 0; q < 50; ++q) {
    const FlatVector query = flatten(oracle::random_window(rng, 1 + rng() % 100));
    CHECK(knn_classify(index, query) == oracle::knn(points, labels, 3, query));
  }
}

TEST_CASE("knn with k=1 recalls its own points") {
  std::mt19937_64 rng(4);
  Dataset d;
  for (int i = 0; i < 60; ++i) {
    d.add(oracle::random_window(rng, 10 + rng() % 90), class_from_id(rng() % kNumClasses));
  }
  const KnnIndex index = KnnIndex::build(d, 1);
  for (const auto& item : d.items()) CHECK(knn_classify(index, flatten(item.window)) == item.label);
}

TEST_CASE("knn predictions ignore storage order") {
  std::mt19937_64 rng(5);
  std::vector<std::pair<FlatVector, StrokeClass>> items;
  for (int i = 0; i < 80; ++i) {
    items.emplace_back(flatten(oracle::random_window(rng, 40)), class_from_id(rng() % kNumClasses));
  }
  KnnIndex a(3), b(3);
  for (const auto& [p, c] : items) a.add(p, c);
  std::shuffle(items.begin(), items.end(), rng);
  for (const auto& [p, c] : items) b.add(p, c);
  for (int q = 0; q < 30; ++q) {
    const FlatVector query = flatten(oracle::random_window(rng, 40));
    CHECK(knn_classify(a, query) == knn_classify(b, query));
  }
}
