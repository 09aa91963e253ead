#include "psd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "psd/error.hpp"
#include "psd/rng.hpp"

namespace psd {

SparseDepth sample_random(const Raster& gt, double rate, std::uint64_t seed) {
  if (gt.channels() != 1) throw ValueError("ground truth must be single-channel");
  if (!(rate > 0.0 && rate <= 1.0)) throw ValueError("sampling rate must lie in (0, 1]");
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (gt.at_index(i) > 0.0) valid.push_back(i);
  }
  if (valid.empty()) throw ValueError("ground truth has no valid pixel");
  const auto m = std::min<std::size_t>(
      valid.size(), static_cast<std::size_t>(std::llround(rate * static_cast<double>(valid.size()))));

  // Partial Fisher-Yates: the first m slots become a uniform sample.
  CounterRng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(valid.size() - i));
    std::swap(valid[i], valid[j]);
  }
  std::vector<double> out(gt.pixel_count(), 0.0);
  for (std::size_t i = 0; i < m; ++i) out[valid[i]] = gt.at_index(valid[i]);
  return SparseDepth(Raster(gt.height(), gt.width(), 1, std::move(out)));
}

Raster harris_response(const Raster& rgb) {
  if (rgb.channels() != 3 && rgb.channels() != 1) {
    throw ValueError("Harris response needs an RGB or gray raster");
  }
  const int h = rgb.height();
  const int w = rgb.width();
  std::vector<double> lum(rgb.pixel_count());
  for (std::size_t i = 0; i < lum.size(); ++i) {
    lum[i] = rgb.channels() == 1 ? rgb.at_index(i)
                                 : 0.299 * rgb.at_index(i, 0) + 0.587 * rgb.at_index(i, 1) +
                                       0.114 * rgb.at_index(i, 2);
  }
  auto L = [&](int y, int x) { return lum[std::clamp(y, 0, h - 1) * w + std::clamp(x, 0, w - 1)]; };

  std::vector<double> ixx(lum.size());
  std::vector<double> iyy(lum.size());
  std::vector<double> ixy(lum.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (L(y - 1, x + 1) + 2 * L(y, x + 1) + L(y + 1, x + 1) - L(y - 1, x - 1) -
                         2 * L(y, x - 1) - L(y + 1, x - 1)) / 8.0;
      const double gy = (L(y + 1, x - 1) + 2 * L(y + 1, x) + L(y + 1, x + 1) - L(y - 1, x - 1) -
                         2 * L(y - 1, x) - L(y - 1, x + 1)) / 8.0;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      ixx[i] = gx * gx;
      iyy[i] = gy * gy;
      ixy[i] = gx * gy;
    }
  }
  constexpr double kGauss[3] = {1.0, 2.0, 1.0};
  std::vector<double> out(lum.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sxx = 0.0;
      double syy = 0.0;
      double sxy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t j =
              static_cast<std::size_t>(std::clamp(y + dy, 0, h - 1)) * w + std::clamp(x + dx, 0, w - 1);
          const double k = kGauss[dy + 1] * kGauss[dx + 1] / 16.0;
          sxx += k * ixx[j];
          syy += k * iyy[j];
          sxy += k * ixy[j];
        }
      }
      const double det = sxx * syy - sxy * sxy;
      const double tr = sxx + syy;
      out[static_cast<std::size_t>(y) * w + x] = det - kHarrisK * tr * tr;
    }
  }
  return Raster(h, w, 1, std::move(out));
}

std::vector<std::size_t> harris_corners(const Raster& response) {
  const int h = response.height();
  const int w = response.width();
  std::vector<std::size_t> corners;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double r = response.at_index(i);
      if (!(r > 0.0)) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if ((dy == 0 && dx == 0) || yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
          const double q = response.at_index(j);
          // On a plateau, the first pixel in raster order survives.
          if (q > r || (q == r && j < i)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) corners.push_back(i);
    }
  }
  std::stable_sort(corners.begin(), corners.end(), [&](std::size_t a, std::size_t b) {
    return response.at_index(a) > response.at_index(b);
  });
  return corners;
}

SparseDepth sample_harris(const Raster& rgb, const Raster& gt, std::size_t max_points,
                          std::uint64_t /*seed*/) {
  if (gt.channels() != 1) throw ValueError("ground truth must be single-channel");
  if (!rgb.same_dims(gt)) throw ValueError("image and ground truth dims differ");
  std::vector<double> out(gt.pixel_count(), 0.0);
  if (max_points > 0) {
    std::size_t taken = 0;
    for (std::size_t i : harris_corners(harris_response(rgb))) {
      if (taken == max_points) break;
      if (!(gt.at_index(i) > 0.0)) continue;
      out[i] = gt.at_index(i);
      ++taken;
    }
  }
  return SparseDepth(Raster(gt.height(), gt.width(), 1, std::move(out)));
}

void RadiusRange::validate() const {
  if (!(min > 0.0 && min <= max && std::isfinite(max))) {
    throw ValueError("radius range must satisfy 0 < min <= max");
  }
}

bool Ellipse::contains(double col, double row) const noexcept {
  const double dx = col - cx;
  const double dy = row - cy;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double u = (dx * c + dy * s) / a;
  const double v = (-dx * s + dy * c) / b;
  return u * u + v * v <= 1.0;
}

std::vector<Ellipse> generate_holes(int height, int width, std::size_t hole_count,
                                    const RadiusRange& radii, std::uint64_t seed) {
  radii.validate();
  CounterRng rng(seed, 1);
  std::vector<Ellipse> holes(hole_count);
  for (auto& e : holes) {
    e.cx = rng.uniform(0.0, width);
    e.cy = rng.uniform(0.0, height);
    e.a = rng.uniform(radii.min, radii.max);
    e.b = rng.uniform(radii.min, radii.max);
    e.theta = rng.uniform(0.0, std::numbers::pi);
  }
  return holes;
}

SparseDepth apply_pseudo_holes(const SparseDepth& sparse, std::size_t hole_count,
                               const RadiusRange& radii, std::uint64_t seed) {
  const auto holes = generate_holes(sparse.height(), sparse.width(), hole_count, radii, seed);
  std::vector<double> out(sparse.raster().values().begin(), sparse.raster().values().end());
  const int w = sparse.width();
  for (std::size_t i : sparse.measured_indices()) {
    const double col = static_cast<double>(i % w);
    const double row = static_cast<double>(i / w);
    for (const auto& e : holes) {
      if (e.contains(col, row)) {
        out[i] = 0.0;
        break;
      }
    }
  }
  return SparseDepth(Raster(sparse.height(), sparse.width(), 1, std::move(out)));
}

}  // namespace psd
