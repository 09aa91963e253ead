#include "psd/scale_align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "psd/error.hpp"

namespace psd {

namespace {

constexpr double kMinVariance = 1e-12;

struct Sample {
  double x;  // relative value
  double y;  // inverse measured depth
};

ScaleShift solve(const std::vector<Sample>& samples) {
  const auto n = static_cast<double>(samples.size());
  if (samples.size() < 2) {
    throw DegenerateSystem("alignment needs at least 2 measurements, got " +
                           std::to_string(samples.size()));
  }
  double mx = 0.0;
  double my = 0.0;
  for (const auto& s : samples) {
    mx += s.x;
    my += s.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = s.x - mx;
    sxx += dx * dx;
    sxy += dx * (s.y - my);
  }
  if (sxx / n < kMinVariance) {
    throw DegenerateSystem("relative depth is constant over the measurements");
  }
  ScaleShift ss;
  ss.gamma = sxy / sxx;
  ss.rho = my - ss.gamma * mx;
  double energy = 0.0;
  for (const auto& s : samples) {
    const double r = ss.gamma * s.x + ss.rho - s.y;
    energy += r * r;
  }
  ss.residual_rms = std::sqrt(energy / n);
  ss.inlier_count = samples.size();
  return ss;
}

std::vector<Sample> collect(const Raster& relative, const SparseDepth& sparse) {
  if (relative.channels() != 1) throw ValueError("relative depth must be single-channel");
  if (!relative.same_dims(sparse.raster())) {
    throw ValueError("relative depth and sparse depth dims differ");
  }
  std::vector<Sample> samples;
  samples.reserve(sparse.measured_count());
  for (std::size_t i : sparse.measured_indices()) {
    samples.push_back({relative.at_index(i), 1.0 / sparse.value(i)});
  }
  return samples;
}

}  // namespace

ScaleShift fit_scale_shift(const Raster& relative, const SparseDepth& sparse,
                           const FitOptions& options) {
  std::vector<Sample> samples = collect(relative, sparse);
  ScaleShift ss = solve(samples);
  if (!options.trimmed_refit) return ss;

  const std::size_t keep =
      std::max<std::size_t>(2, samples.size() - samples.size() / 10);
  if (keep >= samples.size()) return ss;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  auto residual = [&](std::size_t i) {
    return std::abs(ss.gamma * samples[i].x + ss.rho - samples[i].y);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return residual(a) < residual(b); });
  std::vector<Sample> kept;
  kept.reserve(keep);
  for (std::size_t j = 0; j < keep; ++j) kept.push_back(samples[order[j]]);
  return solve(kept);
}

double alignment_energy(const Raster& relative, const SparseDepth& sparse, double gamma,
                        double rho) {
  double energy = 0.0;
  for (const auto& s : collect(relative, sparse)) {
    const double r = gamma * s.x + rho - s.y;
    energy += r * r;
  }
  return energy;
}

MetricDepth apply_scale_shift(const Raster& relative, const ScaleShift& ss,
                              const DepthClamp& clamp) {
  if (!(clamp.min > 0.0 && clamp.min < clamp.max)) {
    throw ValueError("clamp must satisfy 0 < min < max");
  }
  if (relative.channels() != 1) throw ValueError("relative depth must be single-channel");
  std::vector<double> out(relative.pixel_count());
  std::size_t nonpositive = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double denom = ss.gamma * relative.at_index(i) + ss.rho;
    if (denom <= 0.0) {
      out[i] = clamp.max;
      ++nonpositive;
    } else {
      out[i] = std::clamp(1.0 / denom, clamp.min, clamp.max);
    }
  }
  return {Raster(relative.height(), relative.width(), 1, std::move(out)), nonpositive};
}

}  // namespace psd
