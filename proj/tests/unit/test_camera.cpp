#include <gtest/gtest.h>

#include <fstream>

#include "psd/camera.hpp"
#include "psd/error.hpp"
#include "test_support.hpp"

namespace psd {
namespace {

TEST(Backproject, PrincipalPointAndUnitOffset) {
  const CameraIntrinsics k{2.0, 3.0, 1.0, 1.0};
  std::vector<double> d(4 * 4, 1.0);
  d[1 * 4 + 1] = 5.0;  // (u, v) = (cx, cy)
  const PointCloud cloud = backproject(Raster(4, 4, 1, d), k);
  const Point3 pp = cloud.points[1 * 4 + 1];
  EXPECT_EQ(pp[0], 0.0);
  EXPECT_EQ(pp[1], 0.0);
  EXPECT_EQ(pp[2], 5.0);

  // (cx + fx, cy + fy) = (3, 4): column 3, row 4 on a 5x4 grid.
  const PointCloud unit = backproject(Raster(5, 4, 1, 1.0), k);
  const Point3 p = unit.points[4 * 4 + 3];
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0);
  EXPECT_EQ(p[2], 1.0);
}

TEST(Backproject, ProjectRoundTripAndExactDepth) {
  CounterRng rng(9);
  for (int t = 0; t < 500; ++t) {
    const CameraIntrinsics k{rng.uniform(20, 800), rng.uniform(20, 800), rng.uniform(0, 50),
                             rng.uniform(0, 50)};
    const Raster depth = testing::random_raster(rng, 3, 3, 1, 0.1, 100.0);
    const PointCloud cloud = backproject(depth, k);
    const std::size_t i = rng.below(9);
    const auto uv = project(cloud.points[i], k);
    EXPECT_NEAR(uv[0], static_cast<double>(i % 3), 1e-6);
    EXPECT_NEAR(uv[1], static_cast<double>(i / 3), 1e-6);
    EXPECT_EQ(cloud.points[i][2], depth.at_index(i));
  }
}

TEST(Backproject, MeasuredFlagsAndErrors) {
  const CameraIntrinsics k{10, 10, 1, 1};
  std::vector<double> s(9, 0.0);
  s[2] = 4.0;
  const SparseDepth sparse(Raster(3, 3, 1, s));
  const PointCloud cloud = backproject(Raster(3, 3, 1, 2.0), k, &sparse);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(cloud.is_measured(i), i == 2);
  EXPECT_THROW(backproject(Raster(3, 3, 1, 0.0), k), ValueError);
  EXPECT_THROW(backproject(Raster(3, 3, 1, 1.0), CameraIntrinsics{0, 1, 0, 0}), ValueError);
}

TEST(Intrinsics, FileRoundTripAndErrors) {
  testing::TempDir dir("intrinsics");
  const CameraIntrinsics k{518.8579, 519.4696, 325.5824, 253.7362};
  write_intrinsics(k, dir / "k.txt");
  const CameraIntrinsics back = load_intrinsics(dir / "k.txt");
  EXPECT_EQ(back.fx, k.fx);
  EXPECT_EQ(back.fy, k.fy);
  EXPECT_EQ(back.cx, k.cx);
  EXPECT_EQ(back.cy, k.cy);

  EXPECT_THROW(load_intrinsics(dir / "missing.txt"), IoError);
  std::ofstream(dir / "short.txt") << "1 2 3\n";
  EXPECT_THROW(load_intrinsics(dir / "short.txt"), FormatError);
  std::ofstream(dir / "neg.txt") << "-1 2 3 4\n";
  EXPECT_THROW(load_intrinsics(dir / "neg.txt"), ValueError);
}

}  // namespace
}  // namespace psd
