#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "psd/raster.hpp"

namespace psd {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws ValueError unless fx, fy > 0 and all values finite.
  void validate() const;
};

/// Reads a single line "fx fy cx cy".
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const CameraIntrinsics& k, const std::filesystem::path& path);

using Point3 = std::array<double, 3>;

/// One 3D point per pixel, row-major and aligned with the source raster.
struct PointCloud {
  int height = 0;
  int width = 0;
  std::vector<Point3> points;
  std::vector<std::uint8_t> measured;

  std::size_t size() const noexcept { return points.size(); }
  bool is_measured(std::size_t i) const noexcept { return measured[i] != 0; }
};

/// point(u, v) = depth(u, v) * K^-1 * (u, v, 1). Pixel u is the column, v the
/// row. Throws ValueError on nonpositive depth. Measured flags come from
/// `sparse` when given, and are all cleared otherwise.
PointCloud backproject(const Raster& depth, const CameraIntrinsics& k,
                       const SparseDepth* sparse = nullptr);

/// Inverse of backproject for a single point: (u, v).
std::array<double, 2> project(const Point3& p, const CameraIntrinsics& k);

}  // namespace psd
