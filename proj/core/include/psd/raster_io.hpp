#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "psd/raster.hpp"

namespace psd {

enum class RasterFormat { kDfr, kPfm, kPng16 };

/// Parses "dfr" / "pfm" / "png16"; throws FormatError otherwise.
RasterFormat parse_format(std::string_view name);
/// Picks the format from the file extension (.dfr, .pfm, .png).
RasterFormat format_from_extension(const std::filesystem::path& path);

// DFR layout: magic "DFR1", u16 version, u32 height, u32 width, u32 channels,
// u8 dtype, then row-major channel-interleaved little-endian payload.
inline constexpr std::array<char, 4> kDfrMagic = {'D', 'F', 'R', '1'};
inline constexpr std::uint16_t kDfrVersion = 1;
inline constexpr std::uint8_t kDfrDtypeF32 = 0;
inline constexpr std::size_t kDfrHeaderSize = 19;

struct RasterHeader {
  std::array<char, 4> magic = kDfrMagic;
  std::uint16_t version = kDfrVersion;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::uint8_t dtype = kDfrDtypeF32;
};

std::array<std::uint8_t, kDfrHeaderSize> encode_header(const RasterHeader& header);
/// Throws FormatError on bad magic, version, dims or dtype.
RasterHeader decode_header(std::span<const std::uint8_t> bytes);

Raster load_raster(const std::filesystem::path& path, RasterFormat format);
Raster load_raster(const std::filesystem::path& path);

/// Writes atomically (temp file + rename). png16 requires one channel with
/// values in [0, 65.535] m, stored as rounded millimeters.
void write_raster(const Raster& raster, const std::filesystem::path& path, RasterFormat format);
void write_raster(const Raster& raster, const std::filesystem::path& path);

/// 8-bit RGB PNG from an H x W x 3 raster with values in [0, 1].
void write_png_rgb8(const Raster& rgb, const std::filesystem::path& path);

/// Writes `bytes` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace psd
