#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psd {

/// Dense H x W x C grid of finite doubles, row-major and channel-interleaved.
///
/// A Raster is immutable once constructed; every constructor rejects NaN/Inf
/// with ValueError and a size mismatch with FormatError.
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, int channels, double fill = 0.0);
  Raster(int height, int width, int channels, std::vector<double> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const noexcept { return values_.empty(); }

  double at(int row, int col, int ch = 0) const noexcept {
    return values_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
  }
  /// Value of channel `ch` at flat pixel index `pixel`.
  double at_index(std::size_t pixel, int ch = 0) const noexcept {
    return values_[pixel * channels_ + ch];
  }
  std::span<const double> pixel(std::size_t index) const noexcept {
    return {values_.data() + index * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool same_dims(const Raster& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  /// Extracts a single channel as an H x W x 1 raster.
  Raster channel(int ch) const;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

/// Per-pixel boolean selection over an H x W grid.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int h, int w, bool value = false)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, value ? 1 : 0) {}

  bool operator[](std::size_t i) const noexcept { return bits[i] != 0; }
  std::size_t count() const noexcept;
};

/// Single-channel metric depth where 0.0 marks a missing measurement.
class SparseDepth {
 public:
  SparseDepth() = default;
  /// Throws ValueError if `raster` is multi-channel or has negative values.
  explicit SparseDepth(Raster raster);

  const Raster& raster() const noexcept { return raster_; }
  int height() const noexcept { return raster_.height(); }
  int width() const noexcept { return raster_.width(); }
  double value(std::size_t pixel) const noexcept { return raster_.at_index(pixel); }
  bool measured(std::size_t pixel) const noexcept { return raster_.at_index(pixel) > 0.0; }

  /// Flat indices of measured pixels, ascending.
  const std::vector<std::size_t>& measured_indices() const noexcept { return omega_; }
  std::size_t measured_count() const noexcept { return omega_.size(); }
  Mask mask() const;

  double min_measured() const;
  double max_measured() const;

 private:
  Raster raster_;
  std::vector<std::size_t> omega_;
};

/// Throws ValueError on negative depth, exactly as the SparseDepth constructor.
SparseDepth to_sparse(const Raster& raster);

}  // namespace psd
