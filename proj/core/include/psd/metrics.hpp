#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "psd/raster.hpp"

namespace psd {

inline const std::vector<double> kDefaultDeltaThresholds = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

struct MetricsReport {
  double mae = 0.0;   // mm
  double rmse = 0.0;  // mm
  double rel = 0.0;   // percent
  std::map<double, double> delta;  // threshold -> percent
  std::size_t pixel_count = 0;
};

/// Metrics over pixels with gt > 0 (and `valid`, when given). Throws
/// EmptyMask if no pixel qualifies and ValueError on a dims mismatch.
MetricsReport compute_metrics(const Raster& pred, const Raster& gt, const Mask* valid = nullptr,
                              const std::vector<double>& thresholds = kDefaultDeltaThresholds);

/// `metric=value` lines.
std::string format_metrics_text(const MetricsReport& report);
/// Single-line JSON record.
std::string format_metrics_json(const MetricsReport& report);

/// Absolute-error PNG with a fixed blue-to-red ramp saturating at `max_error`
/// meters (auto: max error over valid pixels when <= 0), plus `<png>.txt`
/// holding the scale.
void write_error_map(const Raster& pred, const Raster& gt, const std::filesystem::path& png,
                     double max_error = 0.0);

}  // namespace psd
