#include "psd/prefill.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psd/error.hpp"

namespace psd {

int PrefillParams::radius() const {
  return kernel_radius > 0 ? kernel_radius : static_cast<int>(std::ceil(3.0 * sigma));
}

void PrefillParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValueError("prefill sigma must be positive");
  if (max_rounds < 1) throw ValueError("prefill max_rounds must be at least 1");
  if (kernel_radius < 0) throw ValueError("prefill kernel_radius must be nonnegative");
}

int normalized_convolution_fill(int height, int width, std::vector<double>& values,
                                std::vector<std::uint8_t>& filled, const PrefillParams& params) {
  params.validate();
  const int r = params.radius();
  const int side = 2 * r + 1;
  std::vector<double> kernel(static_cast<std::size_t>(side) * side);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      kernel[(dy + r) * side + (dx + r)] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * params.sigma * params.sigma));
    }
  }

  std::vector<std::pair<std::size_t, double>> updates;
  int rounds = 0;
  while (rounds < params.max_rounds) {
    updates.clear();
    bool any_empty = false;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        if (filled[i]) continue;
        any_empty = true;
        // Accumulate offsets from the first contributing value so that a
        // window of identical values reproduces that value exactly.
        double wsum = 0.0;
        double dsum = 0.0;
        double ref = 0.0;
        double lo = 0.0;
        double hi = 0.0;
        for (int yy = std::max(0, y - r); yy <= std::min(height - 1, y + r); ++yy) {
          const double* krow = &kernel[(yy - y + r) * side + r];
          for (int xx = std::max(0, x - r); xx <= std::min(width - 1, x + r); ++xx) {
            const std::size_t j = static_cast<std::size_t>(yy) * width + xx;
            if (!filled[j]) continue;
            const double v = values[j];
            if (wsum == 0.0) {
              ref = lo = hi = v;
            } else {
              lo = std::min(lo, v);
              hi = std::max(hi, v);
            }
            const double w = krow[xx - x];
            wsum += w;
            dsum += w * (v - ref);
          }
        }
        if (wsum > 0.0) updates.emplace_back(i, std::clamp(ref + dsum / wsum, lo, hi));
      }
    }
    if (!any_empty || updates.empty()) break;
    for (const auto& [i, v] : updates) {
      values[i] = v;
      filled[i] = 1;
    }
    ++rounds;
  }
  return rounds;
}

Raster prefill_gaussian(const SparseDepth& sparse, const PrefillParams& params) {
  if (sparse.measured_count() == 0) throw EmptyInput("prefill needs at least one measurement");
  std::vector<double> values(sparse.raster().values().begin(), sparse.raster().values().end());
  std::vector<std::uint8_t> filled(values.size(), 0);
  double mean = 0.0;
  for (std::size_t i : sparse.measured_indices()) {
    filled[i] = 1;
    mean += values[i];
  }
  mean /= static_cast<double>(sparse.measured_count());

  normalized_convolution_fill(sparse.height(), sparse.width(), values, filled, params);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!filled[i]) values[i] = mean;
  }
  return Raster(sparse.height(), sparse.width(), 1, std::move(values));
}

}  // namespace psd
