#include "psd/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psd/error.hpp"

namespace psd {

namespace {

void check_dims(int height, int width, int channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw FormatError("raster dims must be positive, got " + std::to_string(height) + "x" +
                      std::to_string(width) + "x" + std::to_string(channels));
  }
}

}  // namespace

Raster::Raster(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  if (!std::isfinite(fill)) throw ValueError("raster fill value is not finite");
  values_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Raster::Raster(int height, int width, int channels, std::vector<double> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  check_dims(height, width, channels);
  if (values_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw FormatError("raster payload has " + std::to_string(values_.size()) +
                      " values, expected " +
                      std::to_string(static_cast<std::size_t>(height) * width * channels));
  }
  const auto bad = std::find_if(values_.begin(), values_.end(),
                                [](double v) { return !std::isfinite(v); });
  if (bad != values_.end()) {
    throw ValueError("raster contains a non-finite value at offset " +
                     std::to_string(bad - values_.begin()));
  }
}

Raster Raster::channel(int ch) const {
  if (ch < 0 || ch >= channels_) throw ValueError("channel index out of range");
  std::vector<double> out(pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at_index(i, ch);
  return Raster(height_, width_, 1, std::move(out));
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

SparseDepth::SparseDepth(Raster raster) : raster_(std::move(raster)) {
  if (raster_.channels() != 1) {
    throw ValueError("sparse depth must be single-channel, got " +
                     std::to_string(raster_.channels()) + " channels");
  }
  const auto values = raster_.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      throw ValueError("negative depth " + std::to_string(values[i]) + " at pixel " +
                       std::to_string(i));
    }
    if (values[i] > 0.0) omega_.push_back(i);
  }
}

Mask SparseDepth::mask() const {
  Mask m(height(), width());
  for (std::size_t i : omega_) m.bits[i] = 1;
  return m;
}

double SparseDepth::min_measured() const {
  if (omega_.empty()) throw EmptyInput("no measured pixels");
  double lo = value(omega_.front());
  for (std::size_t i : omega_) lo = std::min(lo, value(i));
  return lo;
}

double SparseDepth::max_measured() const {
  if (omega_.empty()) throw EmptyInput("no measured pixels");
  double hi = value(omega_.front());
  for (std::size_t i : omega_) hi = std::max(hi, value(i));
  return hi;
}

SparseDepth to_sparse(const Raster& raster) { return SparseDepth(raster); }

}  // namespace psd
