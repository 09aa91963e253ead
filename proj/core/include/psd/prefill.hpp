#pragma once

#include <cstdint>
#include <vector>

#include "psd/raster.hpp"

namespace psd {

struct PrefillParams {
  double sigma = 2.0;    // pixels
  int kernel_radius = 0; // 0 means ceil(3 * sigma)
  int max_rounds = 64;

  int radius() const;
  void validate() const;
};

/// Iterated normalized Gaussian convolution over an arbitrary value/mask pair.
/// Each round fills, simultaneously, every empty pixel that has at least one
/// filled pixel inside the kernel window; filled pixels are never modified.
/// Returns the number of rounds run. `filled` is updated in place.
int normalized_convolution_fill(int height, int width, std::vector<double>& values,
                                std::vector<std::uint8_t>& filled, const PrefillParams& params);

/// Dense positive depth from sparse measurements. Measured pixels keep their
/// value; pixels still empty after max_rounds take the mean measured depth.
/// Throws EmptyInput when nothing is measured.
Raster prefill_gaussian(const SparseDepth& sparse, const PrefillParams& params = {});

}  // namespace psd
