#include "psd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psd/error.hpp"
#include "psd/rng.hpp"

namespace psd {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalize(Vec3 v) {
  const double n = std::sqrt(dot(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

constexpr double kMinHit = 1e-9;

}  // namespace

CameraIntrinsics default_intrinsics(int height, int width) {
  return {static_cast<double>(width), static_cast<double>(width), (width - 1) / 2.0,
          (height - 1) / 2.0};
}

std::optional<RayHit> cast_ray(const SceneLayout& layout, const CameraIntrinsics& k, double col,
                               double row) {
  const Vec3 dir{(col - k.cx) / k.fx, (row - k.cy) / k.fy, 1.0};
  std::optional<RayHit> best;
  int surface = 0;
  for (const Plane& p : layout.planes) {
    const double denom = dot(p.normal, dir);
    if (std::abs(denom) > 1e-12) {
      const double t = p.offset / denom;
      if (t > kMinHit && (!best || t < best->depth)) {
        Vec3 n = normalize(p.normal);
        if (dot(n, dir) > 0.0) n = {-n[0], -n[1], -n[2]};
        best = RayHit{t, n, p.albedo, surface};
      }
    }
    ++surface;
  }
  for (const Sphere& s : layout.spheres) {
    const double a = dot(dir, dir);
    const double b = -2.0 * dot(dir, s.center);
    const double c = dot(s.center, s.center) - s.radius * s.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      double t = (-b - sq) / (2.0 * a);
      if (t <= kMinHit) t = (-b + sq) / (2.0 * a);
      if (t > kMinHit && (!best || t < best->depth)) {
        const Vec3 hit{t * dir[0], t * dir[1], t * dir[2]};
        const Vec3 n{(hit[0] - s.center[0]) / s.radius, (hit[1] - s.center[1]) / s.radius,
                     (hit[2] - s.center[2]) / s.radius};
        best = RayHit{t, n, s.albedo, surface};
      }
    }
    ++surface;
  }
  return best;
}

SceneLayout random_room_layout(std::uint64_t seed) {
  CounterRng rng(seed, 7);
  auto color = [&] {
    return Vec3{rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95)};
  };
  const double half_width = rng.uniform(1.5, 3.0);
  const double floor_y = rng.uniform(1.0, 1.6);    // y points down
  const double ceiling_y = -rng.uniform(1.0, 1.6);
  const double back_z = rng.uniform(4.0, 8.0);

  SceneLayout layout;
  layout.planes = {
      {{0.0, 1.0, 0.0}, floor_y, color()},
      {{0.0, 1.0, 0.0}, ceiling_y, color()},
      {{1.0, 0.0, 0.0}, -half_width, color()},
      {{1.0, 0.0, 0.0}, half_width, color()},
      {{0.0, 0.0, 1.0}, back_z, color()},
  };
  const auto spheres = 1 + rng.below(3);
  for (std::uint64_t i = 0; i < spheres; ++i) {
    Sphere s;
    s.radius = rng.uniform(0.3, 0.8);
    s.center = {rng.uniform(-0.6, 0.6) * (half_width - s.radius),
                rng.uniform(-0.5, floor_y - s.radius),
                rng.uniform(1.5 + s.radius, back_z - s.radius - 0.2)};
    s.albedo = color();
    layout.spheres.push_back(s);
  }
  return layout;
}

SyntheticScene synth_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (!(spec.gamma > 0.0)) throw SpecError("gamma must be positive");
  if (spec.height <= 0 || spec.width <= 0) throw SpecError("scene dims must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw SpecError("noise sigma must be nonnegative");

  SyntheticScene scene;
  scene.seed = seed;
  scene.intrinsics = spec.intrinsics.value_or(default_intrinsics(spec.height, spec.width));
  scene.intrinsics.validate();

  const Vec3 light = normalize({0.3, -0.8, -0.5});
  const std::size_t n = static_cast<std::size_t>(spec.height) * spec.width;
  std::vector<double> depth(n);
  std::vector<double> rgb(n * 3);
  for (int v = 0; v < spec.height; ++v) {
    for (int u = 0; u < spec.width; ++u) {
      const auto hit = cast_ray(spec.layout, scene.intrinsics, u, v);
      if (!hit || !(hit->depth > 0.0) || !std::isfinite(hit->depth)) {
        throw SpecError("layout has no positive depth at pixel (" + std::to_string(v) + ", " +
                        std::to_string(u) + ")");
      }
      const std::size_t i = static_cast<std::size_t>(v) * spec.width + u;
      depth[i] = hit->depth;
      const double shade =
          (0.25 + 0.75 * std::max(0.0, dot(hit->normal, light))) / (1.0 + 0.05 * hit->depth);
      for (int c = 0; c < 3; ++c) rgb[3 * i + c] = std::clamp(hit->albedo[c] * shade, 0.0, 1.0);
    }
  }

  CounterRng noise(seed, 2);
  std::vector<double> relative(n);
  for (std::size_t i = 0; i < n; ++i) {
    relative[i] = (1.0 / depth[i] - spec.rho) / spec.gamma;
    if (spec.noise_sigma > 0.0) relative[i] *= 1.0 + spec.noise_sigma * noise.normal();
  }

  scene.gt_depth = Raster(spec.height, spec.width, 1, std::move(depth));
  scene.rgb = Raster(spec.height, spec.width, 3, std::move(rgb));
  scene.relative_depth = Raster(spec.height, spec.width, 1, std::move(relative));
  return scene;
}

}  // namespace psd
