#pragma once

// Naive reference implementations used as test oracles. They deliberately
// share no code with the library beyond the Raster container.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "psd/camera.hpp"
#include "psd/raster.hpp"

namespace psd::oracle {

inline std::vector<double> normalized(std::span<const double> f) {
  double n2 = 0.0;
  for (double x : f) n2 += x * x;
  std::vector<double> out(f.begin(), f.end());
  if (n2 > 0.0) {
    const double n = std::sqrt(n2);
    for (double& x : out) x /= n;
  }
  return out;
}

inline double feature_dot(const Raster& features, std::size_t a, std::size_t b) {
  const auto fa = normalized(features.pixel(a));
  const auto fb = normalized(features.pixel(b));
  double s = 0.0;
  for (std::size_t c = 0; c < fa.size(); ++c) s += fa[c] * fb[c];
  return s;
}

/// Exhaustive kNN over measured pixels; ties broken by lower pixel index.
inline std::vector<std::size_t> knn(const std::vector<Point3>& pts, const std::vector<bool>& measured,
                                    const Point3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!measured[i]) continue;
    const double dx = pts[i][0] - q[0], dy = pts[i][1] - q[1], dz = pts[i][2] - q[2];
    d.emplace_back(std::sqrt(dx * dx + dy * dy + dz * dz), i);
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < std::min(k, d.size()); ++j) out.push_back(d[j].second);
  return out;
}

/// One 3D pass: x = (1 - eta) base + eta sum A_i S_i on unmeasured pixels.
inline std::vector<double> propagate_3d(const Raster& base, const Raster& sparse,
                                        const Raster& cloud_depth, double fx, double fy, double cx,
                                        double cy, const Raster& features, std::size_t k,
                                        double eta) {
  const int h = base.height(), w = base.width();
  std::vector<Point3> pts;
  std::vector<bool> measured;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double d = cloud_depth.at(v, u);
      pts.push_back({d * (u - cx) / fx, d * (v - cy) / fy, d});
      measured.push_back(sparse.at(v, u) > 0.0);
    }
  }
  std::vector<double> out(base.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (measured[i]) {
      out[i] = sparse.at_index(i);
      continue;
    }
    const auto nb = knn(pts, measured, pts[i], k);
    double denom = 0.0;
    for (std::size_t j : nb) denom += feature_dot(features, j, i);
    double agg = 0.0;
    for (std::size_t j : nb) {
      const double a = denom < 1e-9 ? 1.0 / static_cast<double>(nb.size())
                                    : feature_dot(features, j, i) / denom;
      agg += a * sparse.at_index(j);
    }
    out[i] = (1.0 - eta) * base.at_index(i) + eta * agg;
  }
  return out;
}

/// Jacobi 2D propagation with a double loop over the 3x3 stencil.
inline std::vector<double> propagate_2d(const Raster& input, const Raster& sparse,
                                        const Raster& features, int iterations, bool anchor) {
  const int h = input.height(), w = input.width();
  std::vector<double> cur(input.values().begin(), input.values().end());
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(cur.size());
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t x = static_cast<std::size_t>(r) * w + c;
        double denom = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if ((dr == 0 && dc == 0) || rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            denom += std::abs(feature_dot(features, static_cast<std::size_t>(rr) * w + cc, x));
          }
        }
        if (denom < 1e-9) {
          next[x] = cur[x];
          continue;
        }
        double acc = 0.0, wsum = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if ((dr == 0 && dc == 0) || rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
            const double a = feature_dot(features, j, x) / denom;
            acc += a * (sparse.at_index(j) > 0.0 ? sparse.at_index(j) : cur[j]);
            wsum += a;
          }
        }
        next[x] = (1.0 - wsum) * cur[x] + acc;
      }
    }
    if (anchor) {
      for (std::size_t i = 0; i < next.size(); ++i) {
        if (sparse.at_index(i) > 0.0) next[i] = sparse.at_index(i);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace psd::oracle
