#include "psd/propagation.hpp"

#include <array>
#include <string>
#include <vector>

#include "psd/error.hpp"

namespace psd {

PropagationMode parse_mode(std::string_view name) {
  if (name == "serial_3d_then_2d" || name == "3d2d") return PropagationMode::kSerial3dThen2d;
  if (name == "serial_2d_then_3d" || name == "2d3d") return PropagationMode::kSerial2dThen3d;
  if (name == "parallel_mean" || name == "parallel") return PropagationMode::kParallelMean;
  throw ValueError("unknown propagation mode '" + std::string(name) + "'");
}

std::string_view mode_name(PropagationMode mode) {
  switch (mode) {
    case PropagationMode::kSerial3dThen2d: return "serial_3d_then_2d";
    case PropagationMode::kSerial2dThen3d: return "serial_2d_then_3d";
    case PropagationMode::kParallelMean: return "parallel_mean";
  }
  return "unknown";
}

void PropagationConfig::validate() const {
  if (k < 1) throw ValueError("k must be at least 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValueError("eta must lie in [0, 1]");
  if (iterations_2d < 1) throw ValueError("iterations_2d must be at least 1");
  prefill.validate();
}

namespace {

void check_grid(const Raster& r, const SparseDepth& sparse, const char* what) {
  if (r.channels() != 1) throw ValueError(std::string(what) + " must be single-channel");
  if (!r.same_dims(sparse.raster())) {
    throw ValueError(std::string(what) + " and sparse depth dims differ");
  }
}

void check_features(const FeatureMap& f, const SparseDepth& sparse) {
  if (f.height() != sparse.height() || f.width() != sparse.width()) {
    throw ValueError("feature map and sparse depth dims differ");
  }
}

}  // namespace

Raster propagate_3d(const Raster& base, const SparseDepth& sparse, const SpatialIndex& index,
                    const PointCloud& cloud, const FeatureMap& features, int k, double eta) {
  check_grid(base, sparse, "base depth");
  check_features(features, sparse);
  if (cloud.size() != base.pixel_count()) throw ValueError("point cloud and base dims differ");
  if (k < 1) throw ValueError("k must be at least 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValueError("eta must lie in [0, 1]");

  std::vector<double> out(base.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (sparse.measured(i)) {
      out[i] = sparse.value(i);
      continue;
    }
    const NeighborSet nbrs = index.knn(cloud.points[i], static_cast<std::size_t>(k));
    const AffinityWeights3D aff = affinity_3d(features, i, nbrs);
    double agg = 0.0;
    for (std::size_t j = 0; j < nbrs.count(); ++j) agg += aff.weights[j] * sparse.value(nbrs.indices[j]);
    out[i] = (1.0 - eta) * base.at_index(i) + eta * agg;
  }
  return Raster(base.height(), base.width(), 1, std::move(out));
}

Raster propagate_2d(const Raster& input, const SparseDepth& sparse, const FeatureMap& features,
                    int iterations, bool anchor) {
  check_grid(input, sparse, "input depth");
  check_features(features, sparse);
  if (iterations < 1) throw ValueError("iterations must be at least 1");

  const int h = input.height();
  const int w = input.width();
  const std::size_t n = input.pixel_count();
  std::vector<AffinityWeights2D> weights(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) weights[static_cast<std::size_t>(y) * w + x] = affinity_2d(features, y, x);
  }

  std::vector<double> cur(input.values().begin(), input.values().end());
  std::vector<double> next(n);
  for (int it = 0; it < iterations; ++it) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const AffinityWeights2D& a = weights[i];
        double v = a.center_weight * cur[i];
        for (int d = 0; d < 8; ++d) {
          if (!a.in_bounds[d]) continue;
          const std::size_t j = static_cast<std::size_t>(y + kNeighborOffsets[d][0]) * w +
                                (x + kNeighborOffsets[d][1]);
          v += a.neighbor_weights[d] * (sparse.measured(j) ? sparse.value(j) : cur[j]);
        }
        next[i] = v;
      }
    }
    if (anchor) {
      for (std::size_t i : sparse.measured_indices()) next[i] = sparse.value(i);
    }
    cur.swap(next);
  }
  return Raster(h, w, 1, std::move(cur));
}

DualPropagationResult run_dual_propagation(const Raster& metric, const SparseDepth& sparse,
                                           const CameraIntrinsics& k, const FeatureMap& features,
                                           const PropagationConfig& cfg) {
  cfg.validate();
  check_grid(metric, sparse, "metric depth");
  check_features(features, sparse);

  DualPropagationResult result;
  result.prefill = prefill_gaussian(sparse, cfg.prefill);
  const PointCloud cloud = backproject(metric, k, &sparse);
  const SpatialIndex index(cloud);

  switch (cfg.mode) {
    case PropagationMode::kSerial3dThen2d: {
      const Raster d3 = propagate_3d(result.prefill, sparse, index, cloud, features, cfg.k, cfg.eta);
      result.initial = propagate_2d(d3, sparse, features, cfg.iterations_2d, cfg.anchor_2d);
      break;
    }
    case PropagationMode::kSerial2dThen3d: {
      const Raster d2 = propagate_2d(result.prefill, sparse, features, cfg.iterations_2d, cfg.anchor_2d);
      result.initial = propagate_3d(d2, sparse, index, cloud, features, cfg.k, cfg.eta);
      break;
    }
    case PropagationMode::kParallelMean: {
      const Raster d3 = propagate_3d(result.prefill, sparse, index, cloud, features, cfg.k, cfg.eta);
      const Raster d2 = propagate_2d(result.prefill, sparse, features, cfg.iterations_2d, cfg.anchor_2d);
      std::vector<double> mean(d3.pixel_count());
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = 0.5 * (d3.at_index(i) + d2.at_index(i));
      result.initial = Raster(d3.height(), d3.width(), 1, std::move(mean));
      break;
    }
  }
  return result;
}

}  // namespace psd
