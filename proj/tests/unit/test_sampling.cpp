#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "psd/error.hpp"
#include "psd/sampling.hpp"
#include "test_support.hpp"

namespace psd {
namespace {

TEST(SampleRandom, Counts) {
  const Raster gt(100, 100, 1, 3.0);
  EXPECT_EQ(sample_random(gt, 0.01, 1).measured_count(), 100u);
  EXPECT_EQ(sample_random(gt, kUltraSparseSamplingRate, 1).measured_count(), 10u);
  EXPECT_EQ(sample_random(gt, 1.0, 1).measured_count(), 10000u);

  std::vector<double> half(100, 0.0);
  for (std::size_t i = 0; i < 100; i += 2) half[i] = 1.0 + i;
  const SparseDepth s = sample_random(Raster(10, 10, 1, half), 1.0, 5);
  EXPECT_EQ(s.measured_count(), 50u);
  for (std::size_t i : s.measured_indices()) EXPECT_EQ(s.value(i), half[i]);

  EXPECT_THROW(sample_random(gt, 0.0, 1), ValueError);
  EXPECT_THROW(sample_random(gt, 1.5, 1), ValueError);
  EXPECT_THROW(sample_random(Raster(4, 4, 1, 0.0), 0.5, 1), ValueError);
}

TEST(SampleRandom, SeededDeterminism) {
  const Raster gt(64, 64, 1, 1.0);
  int differing_pairs = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SparseDepth a = sample_random(gt, 0.01, seed);
    EXPECT_EQ(a.measured_indices(), sample_random(gt, 0.01, seed).measured_indices());
    differing_pairs += a.measured_indices() != sample_random(gt, 0.01, seed + 1000).measured_indices();
  }
  EXPECT_EQ(differing_pairs, 100);
}

// Direct Harris evaluation with explicit 3x3 kernels and replicated borders.
Raster naive_harris(const Raster& gray) {
  const int h = gray.height(), w = gray.width();
  auto px = [&](int y, int x) { return gray.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1)); };
  const double sx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  const double g[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
  std::vector<double> ixx(h * w), iyy(h * w), ixy(h * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx = 0, gy = 0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          gx += sx[i][j] * px(y + i - 1, x + j - 1);
          gy += sx[j][i] * px(y + i - 1, x + j - 1);
        }
      }
      gx /= 8, gy /= 8;
      ixx[y * w + x] = gx * gx, iyy[y * w + x] = gy * gy, ixy[y * w + x] = gx * gy;
    }
  }
  std::vector<double> out(h * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double a = 0, b = 0, c = 0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const int k = std::clamp(y + i - 1, 0, h - 1) * w + std::clamp(x + j - 1, 0, w - 1);
          a += g[i][j] / 16 * ixx[k], b += g[i][j] / 16 * iyy[k], c += g[i][j] / 16 * ixy[k];
        }
      }
      out[y * w + x] = a * b - c * c - 0.04 * (a + b) * (a + b);
    }
  }
  return Raster(h, w, 1, out);
}

TEST(Harris, SquareCornersRankHighest) {
  const int h = 32, w = 32, lo = 10, hi = 21;  // white square rows/cols [10, 21]
  std::vector<double> gray(h * w, 0.0);
  for (int y = lo; y <= hi; ++y) {
    for (int x = lo; x <= hi; ++x) gray[y * w + x] = 1.0;
  }
  const Raster img(h, w, 1, gray);
  const Raster resp = harris_response(img);
  const Raster ref = naive_harris(img);
  for (std::size_t i = 0; i < resp.pixel_count(); ++i) ASSERT_NEAR(resp.at_index(i), ref.at_index(i), 1e-12);

  const auto corners = harris_corners(resp);
  ASSERT_GE(corners.size(), 4u);
  const double geo[4][2] = {{lo - 0.5, lo - 0.5}, {lo - 0.5, hi + 0.5}, {hi + 0.5, lo - 0.5}, {hi + 0.5, hi + 0.5}};
  std::vector<bool> matched(4, false);
  for (int k = 0; k < 4; ++k) {
    const double y = static_cast<double>(corners[k] / w), x = static_cast<double>(corners[k] % w);
    for (int c = 0; c < 4; ++c) {
      if (std::abs(y - geo[c][0]) <= 1.5 && std::abs(x - geo[c][1]) <= 1.5) matched[c] = true;
    }
  }
  EXPECT_EQ(std::count(matched.begin(), matched.end(), true), 4);

  std::vector<double> rgb;
  for (double v : gray) rgb.insert(rgb.end(), {v, v, v});
  const Raster color(h, w, 3, rgb);
  const auto color_corners = harris_corners(harris_response(color));
  ASSERT_GE(color_corners.size(), 4u);
  std::vector<std::size_t> top(color_corners.begin(), color_corners.begin() + 4);
  std::sort(top.begin(), top.end());
  std::vector<std::size_t> gray_top(corners.begin(), corners.begin() + 4);
  std::sort(gray_top.begin(), gray_top.end());
  EXPECT_EQ(top, gray_top);
  EXPECT_EQ(sample_harris(color, Raster(h, w, 1, 2.0), 4, 0).measured_indices(), top);
}

TEST(Harris, FlatImageAndZeroBudget) {
  const Raster gt(16, 16, 1, 1.0);
  EXPECT_EQ(sample_harris(Raster(16, 16, 3, 0.5), gt, 10, 0).measured_count(), 0u);
  CounterRng rng(81);
  const Raster noisy = testing::random_raster(rng, 16, 16, 3, 0, 1);
  EXPECT_EQ(sample_harris(noisy, gt, 0, 0).measured_count(), 0u);
  EXPECT_LE(sample_harris(noisy, gt, 7, 0).measured_count(), 7u);
  EXPECT_THROW(sample_harris(noisy, Raster(8, 8, 1, 1.0), 3, 0), ValueError);
}

bool inside_quadratic(const Ellipse& e, double col, double row) {
  // (p - c)^T Q (p - c) <= 1 with Q = R diag(1/a^2, 1/b^2) R^T.
  const double c = std::cos(e.theta), s = std::sin(e.theta);
  const double qa = c * c / (e.a * e.a) + s * s / (e.b * e.b);
  const double qb = 2 * c * s * (1 / (e.a * e.a) - 1 / (e.b * e.b));
  const double qc = s * s / (e.a * e.a) + c * c / (e.b * e.b);
  const double dx = col - e.cx, dy = row - e.cy;
  return qa * dx * dx + qb * dx * dy + qc * dy * dy <= 1.0;
}

TEST(PseudoHoles, RemovedExactlyInsideEllipses) {
  CounterRng rng(82);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SparseDepth s = testing::random_sparse(rng, 48, 64, 0.3, 1.0, 5.0);
    const RadiusRange radii{3.0, 10.0};
    const std::size_t count = 1 + seed % 5;
    const SparseDepth out = apply_pseudo_holes(s, count, radii, seed);
    const auto holes = generate_holes(48, 64, count, radii, seed);
    ASSERT_EQ(holes.size(), count);
    for (std::size_t i = 0; i < s.raster().pixel_count(); ++i) {
      const double col = static_cast<double>(i % 64), row = static_cast<double>(i / 64);
      bool inside = false;
      for (const auto& e : holes) inside = inside || inside_quadratic(e, col, row);
      const double expected = inside ? 0.0 : s.value(i);
      ASSERT_EQ(out.value(i), expected) << "seed " << seed << " pixel " << i;
    }
    for (const auto& e : holes) {
      EXPECT_GE(e.a, 3.0);
      EXPECT_LE(e.a, 10.0);
    }
  }
}

TEST(PseudoHoles, IdentityAndFullCover) {
  CounterRng rng(83);
  const SparseDepth s = testing::random_sparse(rng, 20, 20, 0.5, 1.0, 5.0);
  EXPECT_EQ(apply_pseudo_holes(s, 0, RadiusRange{}, 9).raster(), s.raster());
  EXPECT_EQ(apply_pseudo_holes(s, 1, RadiusRange{100.0, 100.0}, 9).measured_count(), 0u);
  EXPECT_THROW(apply_pseudo_holes(s, 1, RadiusRange{5.0, 2.0}, 9), ValueError);
  EXPECT_TRUE((Ellipse{5, 5, 2, 1, 0}).contains(6.9, 5));
  EXPECT_FALSE((Ellipse{5, 5, 2, 1, 0}).contains(5, 6.5));
}

}  // namespace
}  // namespace psd
