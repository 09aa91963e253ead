#include "psd/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "psd/error.hpp"

namespace psd {

namespace fs = std::filesystem;

namespace {

constexpr double kPng16MaxMeters = 65.535;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void put_u16(std::uint8_t* dst, std::uint16_t v) {
  dst[0] = static_cast<std::uint8_t>(v & 0xFF);
  dst[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* dst, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) dst[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
}

std::uint16_t get_u16(const std::uint8_t* src) {
  return static_cast<std::uint16_t>(src[0] | (src[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* src) {
  return static_cast<std::uint32_t>(src[0]) | (static_cast<std::uint32_t>(src[1]) << 8) |
         (static_cast<std::uint32_t>(src[2]) << 16) | (static_cast<std::uint32_t>(src[3]) << 24);
}

float get_f32(const std::uint8_t* src, bool big_endian) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    const int shift = big_endian ? 8 * (3 - i) : 8 * i;
    bits |= static_cast<std::uint32_t>(src[i]) << shift;
  }
  return std::bit_cast<float>(bits);
}

void put_f32_le(std::uint8_t* dst, float f) { put_u32(dst, std::bit_cast<std::uint32_t>(f)); }

float to_f32(double v) {
  const float f = static_cast<float>(v);
  if (!std::isfinite(f)) {
    throw RangeError("value " + std::to_string(v) + " does not fit a 32-bit float");
  }
  return f;
}

// ----- DFR ---------------------------------------------------------------

Raster decode_dfr(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kDfrHeaderSize) throw FormatError("DFR file shorter than its header");
  const RasterHeader h = decode_header(std::span(bytes.data(), kDfrHeaderSize));
  const std::size_t count = static_cast<std::size_t>(h.height) * h.width * h.channels;
  if (bytes.size() != kDfrHeaderSize + count * 4) {
    throw FormatError("DFR payload is " + std::to_string(bytes.size() - kDfrHeaderSize) +
                      " bytes, expected " + std::to_string(count * 4));
  }
  std::vector<double> values(count);
  const std::uint8_t* p = bytes.data() + kDfrHeaderSize;
  for (std::size_t i = 0; i < count; ++i) values[i] = get_f32(p + 4 * i, false);
  return Raster(static_cast<int>(h.height), static_cast<int>(h.width),
                static_cast<int>(h.channels), std::move(values));
}

std::vector<std::uint8_t> encode_dfr(const Raster& r) {
  RasterHeader h;
  h.height = static_cast<std::uint32_t>(r.height());
  h.width = static_cast<std::uint32_t>(r.width());
  h.channels = static_cast<std::uint32_t>(r.channels());
  const auto header = encode_header(h);
  const auto values = r.values();
  std::vector<std::uint8_t> out(kDfrHeaderSize + values.size() * 4);
  std::copy(header.begin(), header.end(), out.begin());
  for (std::size_t i = 0; i < values.size(); ++i) {
    put_f32_le(out.data() + kDfrHeaderSize + 4 * i, to_f32(values[i]));
  }
  return out;
}

// ----- PFM ---------------------------------------------------------------

// Reads one whitespace-delimited token starting at `pos`; leaves `pos` on the
// delimiter that ended it.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
  return tok;
}

Raster decode_pfm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const std::string kind = next_token(bytes, pos);
  int channels = 0;
  if (kind == "Pf") {
    channels = 1;
  } else if (kind == "PF") {
    channels = 3;
  } else {
    throw FormatError("PFM header must start with Pf or PF");
  }
  int width = 0;
  int height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_token(bytes, pos));
    height = std::stoi(next_token(bytes, pos));
    scale = std::stod(next_token(bytes, pos));
  } catch (const std::exception&) {
    throw FormatError("PFM header has malformed dimensions or scale");
  }
  if (width <= 0 || height <= 0 || scale == 0.0) throw FormatError("PFM header has invalid dims");
  // Exactly one whitespace byte separates the scale from the payload.
  if (pos >= bytes.size()) throw FormatError("PFM payload missing");
  ++pos;
  const bool big_endian = scale > 0.0;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos != count * 4) {
    throw FormatError("PFM payload is " + std::to_string(bytes.size() - pos) +
                      " bytes, expected " + std::to_string(count * 4));
  }
  std::vector<double> values(count);
  const std::size_t row_len = static_cast<std::size_t>(width) * channels;
  for (int file_row = 0; file_row < height; ++file_row) {
    const int row = height - 1 - file_row;  // scanlines are stored bottom-up
    for (std::size_t j = 0; j < row_len; ++j) {
      values[row * row_len + j] = get_f32(bytes.data() + pos + 4 * (file_row * row_len + j), big_endian);
    }
  }
  return Raster(height, width, channels, std::move(values));
}

std::vector<std::uint8_t> encode_pfm(const Raster& r) {
  if (r.channels() != 1 && r.channels() != 3) {
    throw FormatError("PFM supports 1 or 3 channels, got " + std::to_string(r.channels()));
  }
  const std::string header = std::string(r.channels() == 1 ? "Pf" : "PF") + "\n" +
                             std::to_string(r.width()) + " " + std::to_string(r.height()) +
                             "\n-1.0\n";
  const std::size_t row_len = static_cast<std::size_t>(r.width()) * r.channels();
  std::vector<std::uint8_t> out(header.size() + r.values().size() * 4);
  std::memcpy(out.data(), header.data(), header.size());
  std::uint8_t* p = out.data() + header.size();
  for (int file_row = 0; file_row < r.height(); ++file_row) {
    const int row = r.height() - 1 - file_row;
    for (std::size_t j = 0; j < row_len; ++j) {
      put_f32_le(p + 4 * (file_row * row_len + j), to_f32(r.values()[row * row_len + j]));
    }
  }
  return out;
}

// ----- PNG ---------------------------------------------------------------

struct PngErrorState {
  char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  if (state != nullptr) std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + length > cur->size) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->data + cur->pos, length);
  cur->pos += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct DecodedPng {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
};

// Only trivially destructible locals live in this frame; `out` and `err`
// outlive the setjmp.
bool decode_png_raw(const std::vector<std::uint8_t>& bytes, DecodedPng& out, PngErrorState& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &cursor, png_read_from_memory);
  png_read_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  if (out.bit_depth != 16 || out.color_type != PNG_COLOR_TYPE_GRAY) {
    std::snprintf(err.message, sizeof(err.message),
                  "expected single-channel 16-bit PNG (bit depth %d, color type %d)",
                  out.bit_depth, out.color_type);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  out.pixels.resize(stride * out.height);
  out.rows.resize(out.height);
  for (std::uint32_t r = 0; r < out.height; ++r) out.rows[r] = out.pixels.data() + r * stride;
  png_read_image(png, out.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Raster decode_png16(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("not a PNG file");
  }
  DecodedPng decoded;
  PngErrorState err;
  if (!decode_png_raw(bytes, decoded, err)) {
    throw FormatError(std::string("PNG decode failed: ") + err.message);
  }
  const std::size_t count = static_cast<std::size_t>(decoded.width) * decoded.height;
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    // PNG samples are big-endian.
    const unsigned mm = (decoded.pixels[2 * i] << 8) | decoded.pixels[2 * i + 1];
    values[i] = static_cast<double>(mm) / 1000.0;
  }
  return Raster(static_cast<int>(decoded.height), static_cast<int>(decoded.width), 1,
                std::move(values));
}

bool encode_png_raw(const std::vector<png_bytep>& rows, std::uint32_t width, std::uint32_t height,
                    int bit_depth, int color_type, std::vector<std::uint8_t>& out,
                    PngErrorState& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                            png_warning_handler);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::vector<std::uint8_t> encode_png(std::vector<std::uint8_t>& pixels, int height, int width,
                                     int bit_depth, int color_type, std::size_t stride) {
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = pixels.data() + r * stride;
  std::vector<std::uint8_t> out;
  PngErrorState err;
  if (!encode_png_raw(rows, static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height),
                      bit_depth, color_type, out, err)) {
    throw IoError(std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

std::vector<std::uint8_t> encode_png16(const Raster& r) {
  if (r.channels() != 1) throw FormatError("png16 requires a single-channel raster");
  std::vector<std::uint8_t> pixels(r.pixel_count() * 2);
  for (std::size_t i = 0; i < r.pixel_count(); ++i) {
    const double v = r.at_index(i);
    if (v < 0.0 || v > kPng16MaxMeters) {
      throw RangeError("value " + std::to_string(v) + " m at pixel " + std::to_string(i) +
                       " outside png16 range [0, 65.535]");
    }
    const auto mm = static_cast<std::uint16_t>(std::lround(v * 1000.0));
    pixels[2 * i] = static_cast<std::uint8_t>(mm >> 8);
    pixels[2 * i + 1] = static_cast<std::uint8_t>(mm & 0xFF);
  }
  return encode_png(pixels, r.height(), r.width(), 16, PNG_COLOR_TYPE_GRAY,
                    static_cast<std::size_t>(r.width()) * 2);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

RasterFormat parse_format(std::string_view name) {
  const std::string n = lower(std::string(name));
  if (n == "dfr") return RasterFormat::kDfr;
  if (n == "pfm") return RasterFormat::kPfm;
  if (n == "png16" || n == "png") return RasterFormat::kPng16;
  throw FormatError("unknown raster format '" + std::string(name) + "'");
}

RasterFormat format_from_extension(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".dfr") return RasterFormat::kDfr;
  if (ext == ".pfm") return RasterFormat::kPfm;
  if (ext == ".png") return RasterFormat::kPng16;
  throw FormatError("cannot infer raster format from '" + path.string() + "'");
}

std::array<std::uint8_t, kDfrHeaderSize> encode_header(const RasterHeader& h) {
  std::array<std::uint8_t, kDfrHeaderSize> out{};
  std::memcpy(out.data(), h.magic.data(), 4);
  put_u16(out.data() + 4, h.version);
  put_u32(out.data() + 6, h.height);
  put_u32(out.data() + 10, h.width);
  put_u32(out.data() + 14, h.channels);
  out[18] = h.dtype;
  return out;
}

RasterHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kDfrHeaderSize) throw FormatError("DFR header truncated");
  RasterHeader h;
  std::memcpy(h.magic.data(), bytes.data(), 4);
  if (h.magic != kDfrMagic) throw FormatError("bad DFR magic");
  h.version = get_u16(bytes.data() + 4);
  if (h.version != kDfrVersion) {
    throw FormatError("unsupported DFR version " + std::to_string(h.version));
  }
  h.height = get_u32(bytes.data() + 6);
  h.width = get_u32(bytes.data() + 10);
  h.channels = get_u32(bytes.data() + 14);
  h.dtype = bytes[18];
  constexpr auto kMaxDim = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  if (h.height == 0 || h.width == 0 || h.channels == 0 || h.height > kMaxDim ||
      h.width > kMaxDim || h.channels > kMaxDim) {
    throw FormatError("DFR dims must be positive");
  }
  if (h.dtype != kDfrDtypeF32) throw FormatError("unsupported DFR dtype " + std::to_string(h.dtype));
  return h;
}

Raster load_raster(const fs::path& path, RasterFormat format) {
  const auto bytes = read_file(path);
  try {
    switch (format) {
      case RasterFormat::kDfr: return decode_dfr(bytes);
      case RasterFormat::kPfm: return decode_pfm(bytes);
      case RasterFormat::kPng16: return decode_png16(bytes);
    }
  } catch (const Error& e) {
    // Re-raise with the file name attached, keeping the kind.
    if (e.kind() == "ValueError") throw ValueError(path.string() + ": " + e.what());
    if (e.kind() == "FormatError") throw FormatError(path.string() + ": " + e.what());
    throw;
  }
  throw FormatError("unhandled raster format");
}

Raster load_raster(const fs::path& path) { return load_raster(path, format_from_extension(path)); }

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<std::uint64_t> counter{0};
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(tid % 1000003) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

void write_raster(const Raster& raster, const fs::path& path, RasterFormat format) {
  if (raster.empty()) throw ValueError("cannot write an empty raster");
  std::vector<std::uint8_t> bytes;
  switch (format) {
    case RasterFormat::kDfr: bytes = encode_dfr(raster); break;
    case RasterFormat::kPfm: bytes = encode_pfm(raster); break;
    case RasterFormat::kPng16: bytes = encode_png16(raster); break;
  }
  write_file_atomic(path, bytes);
}

void write_raster(const Raster& raster, const fs::path& path) {
  write_raster(raster, path, format_from_extension(path));
}

void write_png_rgb8(const Raster& rgb, const fs::path& path) {
  if (rgb.channels() != 3) throw FormatError("RGB PNG requires 3 channels");
  std::vector<std::uint8_t> pixels(rgb.values().size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(rgb.values()[i], 0.0, 1.0);
    pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  const auto bytes = encode_png(pixels, rgb.height(), rgb.width(), 8, PNG_COLOR_TYPE_RGB,
                                static_cast<std::size_t>(rgb.width()) * 3);
  write_file_atomic(path, bytes);
}

}  // namespace psd
