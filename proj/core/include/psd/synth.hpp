#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "psd/camera.hpp"
#include "psd/raster.hpp"

namespace psd {

using Vec3 = std::array<double, 3>;

/// Points X with dot(normal, X) = offset, in camera coordinates (x right,
/// y down, z forward).
struct Plane {
  Vec3 normal{0.0, 0.0, 1.0};
  double offset = 1.0;
  Vec3 albedo{0.8, 0.8, 0.8};
};

struct Sphere {
  Vec3 center{0.0, 0.0, 3.0};
  double radius = 0.5;
  Vec3 albedo{0.8, 0.2, 0.2};
};

struct SceneLayout {
  std::vector<Plane> planes;
  std::vector<Sphere> spheres;
};

struct SceneSpec {
  SceneLayout layout;
  int height = 64;
  int width = 64;
  std::optional<CameraIntrinsics> intrinsics;  // default: f = width, centered
  double gamma = 1.0;
  double rho = 0.0;
  double noise_sigma = 0.0;  // multiplicative, on relative depth
};

struct SyntheticScene {
  Raster rgb;
  Raster gt_depth;
  Raster relative_depth;
  CameraIntrinsics intrinsics;
  std::uint64_t seed = 0;
};

struct RayHit {
  double depth = 0.0;  // z of the hit point
  Vec3 normal{};
  Vec3 albedo{};
  int surface = -1;    // planes first, then spheres
};

/// Nearest hit along the ray through pixel (col, row). std::nullopt on a miss.
std::optional<RayHit> cast_ray(const SceneLayout& layout, const CameraIntrinsics& k, double col,
                               double row);

CameraIntrinsics default_intrinsics(int height, int width);

/// Closed box room around the camera with 1-3 spheres, drawn from `seed`.
SceneLayout random_room_layout(std::uint64_t seed);

/// Ray-cast the layout; relative = (1/gt - rho) / gamma * (1 + eps),
/// eps ~ N(0, sigma^2). Throws SpecError on gamma <= 0 or when a pixel has
/// no positive-depth hit.
SyntheticScene synth_scene(const SceneSpec& spec, std::uint64_t seed);

}  // namespace psd
