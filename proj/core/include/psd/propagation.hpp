#pragma once

#include <string>
#include <string_view>

#include "psd/affinity.hpp"
#include "psd/camera.hpp"
#include "psd/prefill.hpp"
#include "psd/raster.hpp"
#include "psd/spatial_index.hpp"

namespace psd {

enum class PropagationMode { kSerial3dThen2d, kSerial2dThen3d, kParallelMean };

PropagationMode parse_mode(std::string_view name);
std::string_view mode_name(PropagationMode mode);

struct PropagationConfig {
  int k = 1;
  double eta = 0.9;
  int iterations_2d = 24;
  PropagationMode mode = PropagationMode::kSerial3dThen2d;
  bool anchor_2d = true;
  PrefillParams prefill{};

  void validate() const;
};

/// One pass over unmeasured pixels: (1 - eta) * base + eta * sum A_i S_i over
/// the k nearest measured points in `cloud`. Measured pixels take S exactly.
Raster propagate_3d(const Raster& base, const SparseDepth& sparse, const SpatialIndex& index,
                    const PointCloud& cloud, const FeatureMap& features, int k, double eta);

/// Jacobi iterations of D <- A_x D_x + sum A_i v_i, where v_i is S_i for a
/// measured neighbor and its current value otherwise. With `anchor`, measured
/// pixels are reset to S after every iteration.
Raster propagate_2d(const Raster& input, const SparseDepth& sparse, const FeatureMap& features,
                    int iterations, bool anchor = true);

struct DualPropagationResult {
  Raster initial;  // D_init
  Raster prefill;  // 3D base
};

/// Pre-fill, back-project `metric`, index the measured points and schedule the
/// two propagations according to cfg.mode.
DualPropagationResult run_dual_propagation(const Raster& metric, const SparseDepth& sparse,
                                           const CameraIntrinsics& k, const FeatureMap& features,
                                           const PropagationConfig& cfg);

}  // namespace psd
