#include "psd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "psd/error.hpp"
#include "psd/raster_io.hpp"

namespace psd {

namespace {

std::string threshold_key(double theta) {
  std::ostringstream os;
  os << "delta_" << std::setprecision(10) << theta;
  return os.str();
}

}  // namespace

MetricsReport compute_metrics(const Raster& pred, const Raster& gt, const Mask* valid,
                              const std::vector<double>& thresholds) {
  if (!pred.same_dims(gt) || pred.channels() != 1 || gt.channels() != 1) {
    throw ValueError("prediction and ground truth must be single-channel with equal dims");
  }
  if (valid != nullptr && (valid->height != gt.height() || valid->width != gt.width())) {
    throw ValueError("metrics mask dims differ");
  }
  MetricsReport report;
  std::vector<std::size_t> hits(thresholds.size(), 0);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double rel_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const double g = gt.at_index(i);
    if (!(g > 0.0) || (valid != nullptr && !(*valid)[i])) continue;
    const double p = pred.at_index(i);
    const double err = std::abs(g - p);
    abs_sum += err;
    sq_sum += err * err;
    rel_sum += err / g;
    ++count;
    if (p > 0.0) {
      const double ratio = std::max(p / g, g / p);
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        if (ratio < thresholds[t]) ++hits[t];
      }
    }
  }
  if (count == 0) throw EmptyMask("no valid ground-truth pixel to evaluate");
  const auto n = static_cast<double>(count);
  report.mae = abs_sum / n * 1000.0;
  report.rmse = std::sqrt(sq_sum / n) * 1000.0;
  report.rel = rel_sum / n * 100.0;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    report.delta[thresholds[t]] = 100.0 * static_cast<double>(hits[t]) / n;
  }
  report.pixel_count = count;
  return report;
}

std::string format_metrics_text(const MetricsReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "mae=" << r.mae << '\n';
  os << "rmse=" << r.rmse << '\n';
  os << "rel=" << r.rel << '\n';
  for (const auto& [theta, pct] : r.delta) os << threshold_key(theta) << '=' << pct << '\n';
  os << "pixel_count=" << r.pixel_count << '\n';
  return os.str();
}

std::string format_metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["mae"] = r.mae;
  j["rmse"] = r.rmse;
  j["rel"] = r.rel;
  for (const auto& [theta, pct] : r.delta) j[threshold_key(theta)] = pct;
  j["pixel_count"] = r.pixel_count;
  return j.dump();
}

void write_error_map(const Raster& pred, const Raster& gt, const std::filesystem::path& png,
                     double max_error) {
  if (!pred.same_dims(gt) || pred.channels() != 1 || gt.channels() != 1) {
    throw ValueError("error map needs single-channel rasters with equal dims");
  }
  const std::size_t n = gt.pixel_count();
  if (max_error <= 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (gt.at_index(i) > 0.0) max_error = std::max(max_error, std::abs(pred.at_index(i) - gt.at_index(i)));
    }
    if (max_error <= 0.0) max_error = 1.0;
  }
  std::vector<double> rgb(n * 3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gt.at_index(i) > 0.0)) continue;  // invalid pixels stay black
    const double t = std::clamp(std::abs(pred.at_index(i) - gt.at_index(i)) / max_error, 0.0, 1.0);
    rgb[3 * i + 0] = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
    rgb[3 * i + 1] = std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
    rgb[3 * i + 2] = std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
  }
  write_png_rgb8(Raster(gt.height(), gt.width(), 3, std::move(rgb)), png);

  std::ostringstream os;
  os << std::setprecision(10) << "ramp=blue-green-red\nmin_error_m=0\nmax_error_m=" << max_error
     << '\n';
  const std::string text = os.str();
  std::filesystem::path sidecar = png;
  sidecar += ".txt";
  write_file_atomic(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace psd
