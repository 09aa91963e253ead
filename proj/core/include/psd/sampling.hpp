#pragma once

#include <cstdint>
#include <vector>

#include "psd/raster.hpp"

namespace psd {

inline constexpr double kStandardSamplingRate = 0.01;
inline constexpr double kUltraSparseSamplingRate = 0.001;

/// round(rate * |valid gt|) pixels drawn uniformly without replacement.
/// Throws ValueError when rate is outside (0, 1] or gt has no valid pixel.
SparseDepth sample_random(const Raster& gt, double rate, std::uint64_t seed);

inline constexpr double kHarrisK = 0.04;

/// Harris response det(M) - 0.04 trace(M)^2 of the luminance, with Sobel
/// gradients and a 3x3 Gaussian-weighted structure tensor.
Raster harris_response(const Raster& rgb);

/// Pixels that survive 3x3 non-maximum suppression with positive response,
/// ranked by response descending, ties by lower index.
std::vector<std::size_t> harris_corners(const Raster& response);

/// Top `max_points` Harris corners with valid gt. A flat image yields an empty
/// map. `seed` is accepted for interface symmetry; ranking is deterministic.
SparseDepth sample_harris(const Raster& rgb, const Raster& gt, std::size_t max_points,
                          std::uint64_t seed);

struct RadiusRange {
  double min = 4.0;
  double max = 16.0;
  void validate() const;
};

struct Ellipse {
  double cx = 0.0;  // column
  double cy = 0.0;  // row
  double a = 1.0;   // semi-axis along the rotated u axis
  double b = 1.0;
  double theta = 0.0;

  bool contains(double col, double row) const noexcept;
};

std::vector<Ellipse> generate_holes(int height, int width, std::size_t hole_count,
                                    const RadiusRange& radii, std::uint64_t seed);

/// Zeroes measurements inside `hole_count` seeded random ellipses.
SparseDepth apply_pseudo_holes(const SparseDepth& sparse, std::size_t hole_count,
                               const RadiusRange& radii, std::uint64_t seed);

}  // namespace psd
