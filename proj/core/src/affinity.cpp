#include "psd/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psd/error.hpp"

namespace psd {

FeatureMap::FeatureMap(const Raster& features)
    : height_(features.height()), width_(features.width()), channels_(features.channels()) {
  if (channels_ > kMaxFeatureChannels) {
    throw ValueError("feature raster has " + std::to_string(channels_) + " channels, max " +
                     std::to_string(kMaxFeatureChannels));
  }
  data_.assign(features.values().begin(), features.values().end());
  const std::size_t n = features.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    double* f = data_.data() + p * channels_;
    double norm2 = 0.0;
    for (int c = 0; c < channels_; ++c) norm2 += f[c] * f[c];
    if (norm2 > 0.0) {
      const double norm = std::sqrt(norm2);
      for (int c = 0; c < channels_; ++c) f[c] /= norm;
    }
  }
}

double FeatureMap::dot(std::size_t a, std::size_t b) const noexcept {
  const double* fa = data_.data() + a * channels_;
  const double* fb = data_.data() + b * channels_;
  double s = 0.0;
  for (int c = 0; c < channels_; ++c) s += fa[c] * fb[c];
  return s;
}

namespace {

// Separable Gaussian blur of one channel with replicated borders.
std::vector<double> gaussian_blur(const std::vector<double>& src, int h, int w, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double ksum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    ksum += k[i + r];
  }
  for (double& v : k) v /= ksum;

  std::vector<double> tmp(src.size());
  std::vector<double> out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * src[y * w + std::clamp(x + i, 0, w - 1)];
      tmp[y * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp[std::clamp(y + i, 0, h - 1) * w + x];
      out[y * w + x] = s;
    }
  }
  return out;
}

}  // namespace

Raster fallback_features(const Raster& rgb) {
  if (rgb.channels() != 3) {
    throw ValueError("fallback features need an RGB raster, got " +
                     std::to_string(rgb.channels()) + " channels");
  }
  const int h = rgb.height();
  const int w = rgb.width();
  const std::size_t n = rgb.pixel_count();

  std::vector<double> lum(n);
  std::array<std::vector<double>, 3> smooth;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> plane(n);
    for (std::size_t i = 0; i < n; ++i) plane[i] = rgb.at_index(i, c);
    smooth[c] = gaussian_blur(plane, h, w, 2.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    lum[i] = 0.299 * rgb.at_index(i, 0) + 0.587 * rgb.at_index(i, 1) + 0.114 * rgb.at_index(i, 2);
  }

  constexpr int C = kFallbackFeatureChannels;
  std::vector<double> out(n * C);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      double* f = &out[i * C];
      for (int c = 0; c < 3; ++c) {
        f[c] = rgb.at_index(i, c);
        f[3 + c] = smooth[c][i];
      }
      f[6] = 0.5 * (lum[y * w + std::min(x + 1, w - 1)] - lum[y * w + std::max(x - 1, 0)]);
      f[7] = 0.5 * (lum[std::min(y + 1, h - 1) * w + x] - lum[std::max(y - 1, 0) * w + x]);
      f[8] = static_cast<double>(x) / w;
      f[9] = static_cast<double>(y) / h;
      f[10] = 1.0;
      f[11] = lum[i];
    }
  }
  return Raster(h, w, C, std::move(out));
}

AffinityWeights3D affinity_3d(const FeatureMap& features, std::size_t x,
                              const NeighborSet& neighbors) {
  const std::size_t k = neighbors.count();
  if (k == 0) throw ValueError("affinity_3d needs at least one neighbor");
  AffinityWeights3D out;
  out.weights.resize(k);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out.weights[j] = features.dot(neighbors.indices[j], x);
    sum += out.weights[j];
  }
  if (sum < kAffinityEpsilon) {
    std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(k));
    out.fallback = true;
    return out;
  }
  for (double& a : out.weights) a /= sum;
  return out;
}

AffinityWeights2D affinity_2d(const FeatureMap& features, int row, int col) {
  const int h = features.height();
  const int w = features.width();
  const std::size_t x = static_cast<std::size_t>(row) * w + col;
  AffinityWeights2D out;
  std::array<double, 8> dots{};
  double denom = 0.0;
  for (int d = 0; d < 8; ++d) {
    const int rr = row + kNeighborOffsets[d][0];
    const int cc = col + kNeighborOffsets[d][1];
    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
    out.in_bounds[d] = true;
    dots[d] = features.dot(static_cast<std::size_t>(rr) * w + cc, x);
    denom += std::abs(dots[d]);
  }
  if (denom < kAffinityEpsilon) {
    out.center_weight = 1.0;
    return out;
  }
  double total = 0.0;
  for (int d = 0; d < 8; ++d) {
    out.neighbor_weights[d] = dots[d] / denom;
    total += out.neighbor_weights[d];
  }
  out.center_weight = 1.0 - total;
  return out;
}

}  // namespace psd
