#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "psd/affinity.hpp"
#include "psd/raster.hpp"

namespace psd {

struct CorrectionParams {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double beta_min = 0.0;  // meters
  double beta_max = 0.0;  // meters
  int n = 5;              // slices span i = 0..n
  double tau = 0.2;

  int slice_count() const noexcept { return n + 1; }
  void validate() const;
};

inline constexpr double kMinCorrectedDepth = 1e-3;

struct SparseResidual {
  Raster values;  // S - D_init on measured pixels, 0 elsewhere
  Mask mask;      // measured pixels, so true zero residuals stay distinguishable
};

SparseResidual sparse_residual(const SparseDepth& sparse, const Raster& initial);

struct ResidualRange {
  Raster min;
  Raster max;
};

/// R_min = beta_min - (1 + alpha_min)(1 + U)|R|, R_max = beta_max + (1 + alpha_max)(1 + U)|R|.
ResidualRange residual_range(const Raster& residual, const Raster& uncertainty,
                             const CorrectionParams& params);

/// n + 1 evenly spaced slices R_min + i (R_max - R_min) / n, each shifted by
/// the offset. Returned as an H x W x (n + 1) raster.
Raster residual_slices(const ResidualRange& range, int n, const Raster& offset);

/// Per-pixel softmax(logits) . slices.
Raster combine_scores(const Raster& slices, const Raster& logits);

/// Residual, uncertainty, offset and per-slice logits from a scoring model.
struct ScorerOutputs {
  Raster residual;
  Raster uncertainty;
  Raster offset;
  Raster logits;  // n + 1 channels

  /// Clamps uncertainty into [0, 1] and checks shapes against `height` x
  /// `width` and `slice_count`. Throws ValueError on mismatch.
  ScorerOutputs normalized(int height, int width, int slice_count) const;
};

/// D_hat = max(D_init + R_hat, kMinCorrectedDepth).
Raster apply_correction(const Raster& initial, const ScorerOutputs& scorer,
                        const CorrectionParams& params);

/// U = 1 - exp(-|pred - gt| / (tau (pred + gt))). Throws ValueError on
/// nonpositive depth.
Raster uncertainty_target(const Raster& pred, const Raster& gt, double tau);

struct LossBreakdown {
  double total = 0.0;
  double l1 = 0.0;
  double l_unc = 0.0;
};

/// Throws EmptyMask when `valid` selects nothing.
LossBreakdown loss_total(const Raster& pred, const Raster& gt, const Raster& uncertainty_pred,
                         double tau, const Mask& valid);

// ---------------------------------------------------------------------------
// Scorers

struct ScorerInputs {
  const SparseDepth& sparse;
  const Raster& initial;
  const Raster* metric = nullptr;  // aligned foundation-model depth, if any
  const FeatureMap* features = nullptr;
};

class ResidualScorer {
 public:
  virtual ~ResidualScorer() = default;
  virtual std::string name() const = 0;
  virtual ScorerOutputs score(const ScorerInputs& in, const CorrectionParams& params) const = 0;
};

/// R = U = O = 0 with uniform logits.
class ZeroScorer final : public ResidualScorer {
 public:
  std::string name() const override { return "zero"; }
  ScorerOutputs score(const ScorerInputs& in, const CorrectionParams& params) const override;
};

/// Loads residual.dfr, uncertainty.dfr, offset.dfr and logits.dfr from a directory.
class FileScorer final : public ResidualScorer {
 public:
  explicit FileScorer(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::string name() const override { return "file"; }
  ScorerOutputs score(const ScorerInputs& in, const CorrectionParams& params) const override;

 private:
  std::filesystem::path dir_;
};

struct HeuristicScorerOptions {
  double sigma = 2.0;  // smoothing of the sparse-residual extrapolation
  // Relative inverse-depth RMS at which the foundation-model prior is trusted
  // with weight exp(-1).
  double prior_gate_scale = 0.01;
};

/// Network-free scorer. The residual blends the Gaussian extrapolation of the
/// sparse residual with the gap between aligned metric depth and D_init; the
/// blend weight exp(-(e / scale)^2) uses the relative misfit e of the metric
/// depth at measured pixels. Uncertainty grows with distance to the nearest
/// measurement; logits place the softmax mass on the two slices bracketing
/// the residual.
class HeuristicScorer final : public ResidualScorer {
 public:
  explicit HeuristicScorer(HeuristicScorerOptions options = {}) : options_(options) {}
  std::string name() const override { return "heuristic"; }
  ScorerOutputs score(const ScorerInputs& in, const CorrectionParams& params) const override;

  /// Weight given to the metric-depth prior for a relative misfit `e`.
  double prior_gate(double relative_misfit) const;

 private:
  HeuristicScorerOptions options_;
};

ScorerOutputs load_scorer_bundle(const std::filesystem::path& dir);
void write_scorer_bundle(const ScorerOutputs& outputs, const std::filesystem::path& dir);

}  // namespace psd
