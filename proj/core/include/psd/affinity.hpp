#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "psd/raster.hpp"
#include "psd/spatial_index.hpp"

namespace psd {

inline constexpr double kAffinityEpsilon = 1e-9;
inline constexpr int kFallbackFeatureChannels = 12;
inline constexpr int kMaxFeatureChannels = 512;

/// Per-pixel feature vectors, L2-normalized on construction. All-zero vectors
/// stay zero.
class FeatureMap {
 public:
  FeatureMap() = default;
  /// Throws ValueError if channels exceed kMaxFeatureChannels.
  explicit FeatureMap(const Raster& features);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::span<const double> at(std::size_t pixel) const noexcept {
    return {data_.data() + pixel * channels_, static_cast<std::size_t>(channels_)};
  }
  double dot(std::size_t a, std::size_t b) const noexcept;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// 12 channels per pixel: RGB, Gaussian-smoothed RGB (sigma 2), luminance
/// gradients d/du and d/dv (central differences), u/W, v/H, 1, luminance.
/// Throws ValueError unless `rgb` has 3 channels.
Raster fallback_features(const Raster& rgb);

struct AffinityWeights3D {
  std::vector<double> weights;  // aligned with NeighborSet::indices
  bool fallback = false;
};

/// Order of the 8-neighborhood in AffinityWeights2D.
enum class Direction { kN, kNE, kE, kSE, kS, kSW, kW, kNW };
inline constexpr std::array<std::array<int, 2>, 8> kNeighborOffsets = {{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};  // (drow, dcol)

struct AffinityWeights2D {
  std::array<double, 8> neighbor_weights{};  // 0 for out-of-bounds neighbors
  double center_weight = 1.0;
  std::array<bool, 8> in_bounds{};
};

/// A_i = <F_i, F_x> / sum_j <F_j, F_x>; uniform 1/k when that sum is below
/// kAffinityEpsilon (including negative sums).
AffinityWeights3D affinity_3d(const FeatureMap& features, std::size_t x,
                              const NeighborSet& neighbors);

/// A_i = <F_i, F_x> / sum_j |<F_j, F_x>| over the in-bounds 8-neighborhood,
/// center weight 1 - sum A_i. Falls back to center 1 on a degenerate sum.
AffinityWeights2D affinity_2d(const FeatureMap& features, int row, int col);

}  // namespace psd
