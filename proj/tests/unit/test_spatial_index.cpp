#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "psd/error.hpp"
#include "psd/spatial_index.hpp"
#include "test_support.hpp"

namespace psd {
namespace {

PointCloud random_cloud(CounterRng& rng, int h, int w, double measured_fraction, bool lattice) {
  PointCloud c;
  c.height = h;
  c.width = w;
  c.points.resize(static_cast<std::size_t>(h) * w);
  c.measured.assign(c.points.size(), 0);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    for (double& x : c.points[i]) {
      // Integer lattice coordinates make exact distance ties common.
      x = lattice ? static_cast<double>(rng.below(4)) : rng.uniform(-5.0, 5.0);
    }
    c.measured[i] = rng.uniform() < measured_fraction ? 1 : 0;
  }
  return c;
}

double dist(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::vector<std::size_t> brute_force(const PointCloud& c, const Point3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.is_measured(i)) all.emplace_back(dist(c.points[i], q), i);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < std::min(k, all.size()); ++j) out.push_back(all[j].second);
  return out;
}

TEST(SpatialIndex, MatchesExhaustiveScan) {
  CounterRng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool lattice = trial % 2 == 1;
    PointCloud c = random_cloud(rng, 8 + static_cast<int>(rng.below(8)), 8, 0.4, lattice);
    if (std::count(c.measured.begin(), c.measured.end(), 1) == 0) c.measured[0] = 1;
    const SpatialIndex index = build_index(c);
    const std::size_t k = 1 + rng.below(6);
    Point3 q;
    for (double& x : q) x = lattice ? static_cast<double>(rng.below(4)) : rng.uniform(-6.0, 6.0);
    const NeighborSet got = knn_measured(index, q, k);
    ASSERT_EQ(got.indices, brute_force(c, q, k)) << "trial " << trial;
    for (std::size_t j = 0; j < got.count(); ++j) {
      EXPECT_DOUBLE_EQ(got.distances[j], dist(c.points[got.indices[j]], q));
      if (j > 0) EXPECT_LE(got.distances[j - 1], got.distances[j]);
    }
  }
}

TEST(SpatialIndex, TwoHundredPointsFourNeighbors) {
  CounterRng rng(22);
  PointCloud c = random_cloud(rng, 20, 10, 1.0, false);
  const SpatialIndex index(c);
  EXPECT_EQ(index.size(), 200u);
  for (int q = 0; q < 100; ++q) {
    const Point3 query{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    EXPECT_EQ(index.knn(query, 4).indices, brute_force(c, query, 4));
  }
}

TEST(SpatialIndex, SmallCases) {
  PointCloud c;
  c.height = 1;
  c.width = 3;
  c.points = {Point3{-1, 0, 0}, Point3{7, 7, 7}, Point3{1, 0, 0}};
  c.measured = {1, 0, 1};
  const SpatialIndex index(c);
  // Midpoint tie: the lower pixel index wins.
  EXPECT_EQ(index.knn({0, 0, 0}, 1).indices, std::vector<std::size_t>{0});
  // Exhaustion: only measured points come back.
  EXPECT_EQ(index.knn({0, 0, 0}, 5).count(), 2u);
  // Query on a measured point.
  const NeighborSet self = index.knn({1, 0, 0}, 1);
  EXPECT_EQ(self.indices.front(), 2u);
  EXPECT_EQ(self.distances.front(), 0.0);

  c.measured = {0, 1, 0};
  const SpatialIndex single(c);
  EXPECT_EQ(single.knn({-100, 3, 2}, 3).indices, std::vector<std::size_t>{1});

  c.measured = {0, 0, 0};
  EXPECT_THROW(SpatialIndex{c}, EmptyIndex);
}

}  // namespace
}  // namespace psd
