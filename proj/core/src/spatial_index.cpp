#include "psd/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "psd/error.hpp"

namespace psd {

namespace {

constexpr std::uint32_t kLeafSize = 8;

double squared_distance(const Point3& a, const Point3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct Candidate {
  double d2;
  std::size_t pixel;
  // Max-heap order: the "largest" candidate is the worst one.
  bool operator<(const Candidate& o) const noexcept {
    return d2 < o.d2 || (d2 == o.d2 && pixel < o.pixel);
  }
};

}  // namespace

SpatialIndex::SpatialIndex(const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.is_measured(i)) points_.push_back({cloud.points[i], i});
  }
  if (points_.empty()) throw EmptyIndex("no measured points to index");
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValueError("too many measured points for the spatial index");
  }
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{-1, -1, begin, end, 0, 0.0});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[begin].p;
  Point3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], points_[i].p[a]);
      hi[a] = std::max(hi[a], points_[i].p[a]);
    }
  }
  std::uint8_t axis = 0;
  for (std::uint8_t a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] - lo[axis] == 0.0) return id;  // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [axis](const Entry& a, const Entry& b) {
                     return a.p[axis] < b.p[axis] || (a.p[axis] == b.p[axis] && a.pixel < b.pixel);
                   });
  const double split = points_[mid].p[axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.left = left;
  node.right = right;
  node.axis = axis;
  node.split = split;
  return id;
}

NeighborSet SpatialIndex::knn(const Point3& query, std::size_t k) const {
  if (k == 0) throw ValueError("k must be at least 1");
  const std::size_t want = std::min(k, points_.size());
  std::priority_queue<Candidate> heap;

  auto offer = [&](const Entry& e) {
    const Candidate c{squared_distance(e.p, query), e.pixel};
    if (heap.size() < want) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  };

  // Explicit stack of (node, lower bound on squared distance to its region).
  std::vector<std::pair<std::int32_t, double>> stack;
  stack.reserve(64);
  stack.emplace_back(root_, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (heap.size() == want && bound > heap.top().d2) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) offer(points_[i]);
      continue;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    // Far side first on the stack so the near side is explored first.
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }

  NeighborSet out;
  out.indices.resize(heap.size());
  out.distances.resize(heap.size());
  for (std::size_t j = heap.size(); j-- > 0;) {
    out.indices[j] = heap.top().pixel;
    out.distances[j] = std::sqrt(heap.top().d2);
    heap.pop();
  }
  return out;
}

SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

NeighborSet knn_measured(const SpatialIndex& index, const Point3& query, std::size_t k) {
  return index.knn(query, k);
}

}  // namespace psd
