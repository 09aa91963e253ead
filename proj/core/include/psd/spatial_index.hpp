#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "psd/camera.hpp"

namespace psd {

/// Neighbors of a query, ordered by (distance, pixel index) ascending.
struct NeighborSet {
  std::vector<std::size_t> indices;  // flat pixel indices
  std::vector<double> distances;     // meters

  std::size_t count() const noexcept { return indices.size(); }
};

/// Static KD-tree over the measured points of a PointCloud. Queries are exact;
/// equal distances are ordered by lower pixel index.
class SpatialIndex {
 public:
  /// Throws EmptyIndex when the cloud has no measured points.
  explicit SpatialIndex(const PointCloud& cloud);

  std::size_t size() const noexcept { return points_.size(); }

  /// The min(k, size()) nearest measured points to `query`. k >= 1.
  NeighborSet knn(const Point3& query, std::size_t k) const;

 private:
  struct Node {
    // Leaf when `left` < 0; then [begin, end) indexes into points_.
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  struct Entry {
    Point3 p;
    std::size_t pixel;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Entry> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

SpatialIndex build_index(const PointCloud& cloud);
NeighborSet knn_measured(const SpatialIndex& index, const Point3& query, std::size_t k);

}  // namespace psd
