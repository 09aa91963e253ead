#include <gtest/gtest.h>

#include <cmath>

#include "psd/error.hpp"
#include "psd/scale_align.hpp"
#include "psd/synth.hpp"

namespace psd {
namespace {

TEST(Synth, NoiselessAlignmentReconstructsGroundTruth) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    SceneSpec spec;
    spec.layout = random_room_layout(seed);
    spec.gamma = 3.0;
    spec.rho = 0.3;
    const SyntheticScene scene = synth_scene(spec, seed);
    std::vector<double> s(scene.gt_depth.pixel_count(), 0.0);
    for (std::size_t i = 0; i < s.size(); i += 53) s[i] = scene.gt_depth.at_index(i);
    const ScaleShift ss = fit_scale_shift(scene.relative_depth, SparseDepth(Raster(64, 64, 1, s)));
    const Raster d = apply_scale_shift(scene.relative_depth, ss).depth;
    for (std::size_t i = 0; i < d.pixel_count(); ++i) {
      ASSERT_NEAR(d.at_index(i), scene.gt_depth.at_index(i), 1e-9 * scene.gt_depth.at_index(i));
    }
  }
}

TEST(Synth, SphereSilhouetteMatchesAnalyticIntersection) {
  SceneSpec spec;
  spec.layout.planes.push_back(Plane{{0, 0, 1}, 5.0});
  const Sphere sphere{{0.2, -0.1, 3.0}, 0.8};
  spec.layout.spheres.push_back(sphere);
  spec.height = 48;
  spec.width = 64;
  const SyntheticScene scene = synth_scene(spec, 0);
  const CameraIntrinsics k = scene.intrinsics;
  int on_sphere = 0, on_wall = 0;
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) {
      const double dx = (u - k.cx) / k.fx, dy = (v - k.cy) / k.fy, dz = 1.0;
      // |t d - c|^2 = r^2  ->  a t^2 - 2 b t + c = 0.
      const double a = dx * dx + dy * dy + dz * dz;
      const double b = dx * sphere.center[0] + dy * sphere.center[1] + dz * sphere.center[2];
      const double c = sphere.center[0] * sphere.center[0] + sphere.center[1] * sphere.center[1] +
                       sphere.center[2] * sphere.center[2] - sphere.radius * sphere.radius;
      const double disc = b * b - a * c;
      if (std::abs(disc) < 1e-9) continue;  // grazing ray, ambiguous
      const double expected = disc > 0 ? (b - std::sqrt(disc)) / a : 5.0;
      (disc > 0 ? on_sphere : on_wall)++;
      ASSERT_NEAR(scene.gt_depth.at(v, u), expected, 1e-9) << u << "," << v;
    }
  }
  EXPECT_GT(on_sphere, 50);
  EXPECT_GT(on_wall, 50);
}

TEST(Synth, DeterministicAndNoiseIsSeeded) {
  SceneSpec spec;
  spec.layout = random_room_layout(3);
  spec.noise_sigma = 0.1;
  const SyntheticScene a = synth_scene(spec, 3);
  const SyntheticScene b = synth_scene(spec, 3);
  EXPECT_EQ(a.rgb, b.rgb);
  EXPECT_EQ(a.gt_depth, b.gt_depth);
  EXPECT_EQ(a.relative_depth, b.relative_depth);
  EXPECT_NE(a.relative_depth, synth_scene(spec, 4).relative_depth);
  EXPECT_EQ(random_room_layout(3).spheres.size(), spec.layout.spheres.size());
  for (double v : a.rgb.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Synth, SpecErrors) {
  SceneSpec spec;
  spec.layout = random_room_layout(1);
  spec.gamma = 0.0;
  EXPECT_THROW(synth_scene(spec, 1), SpecError);
  SceneSpec open;  // nothing to hit
  EXPECT_THROW(synth_scene(open, 1), SpecError);
  SceneSpec behind;
  behind.layout.planes.push_back(Plane{{0, 0, 1}, -2.0});
  EXPECT_THROW(synth_scene(behind, 1), SpecError);
}

}  // namespace
}  // namespace psd
