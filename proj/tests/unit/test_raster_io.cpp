#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "psd/error.hpp"
#include "psd/raster_io.hpp"
#include "test_support.hpp"

namespace psd {
namespace {

using testing::TempDir;

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TEST(Raster, RejectsNonFiniteValues) {
  EXPECT_THROW(Raster(1, 2, 1, std::vector<double>{1.0, std::nan("")}), ValueError);
  EXPECT_THROW(Raster(1, 1, 1, std::vector<double>{std::numeric_limits<double>::infinity()}),
               ValueError);
  EXPECT_THROW(Raster(2, 2, 1, std::vector<double>{1.0}), FormatError);
  EXPECT_THROW(Raster(0, 2, 1), FormatError);
}

TEST(RasterIo, DfrConstantPayload) {
  TempDir dir("dfr_const");
  const Raster r(4, 3, 1, 2.0);
  write_raster(r, dir / "a.dfr", RasterFormat::kDfr);
  const Raster back = load_raster(dir / "a.dfr", RasterFormat::kDfr);
  EXPECT_EQ(back.height(), 4);
  EXPECT_EQ(back.width(), 3);
  EXPECT_EQ(back.channels(), 1);
  for (double v : back.values()) EXPECT_EQ(v, 2.0);
}

TEST(RasterIo, DfrZeroRasterByteLayout) {
  TempDir dir("dfr_layout");
  write_raster(Raster(2, 2, 1, 0.0), dir / "z.dfr", RasterFormat::kDfr);
  const auto bytes = slurp(dir / "z.dfr");
  ASSERT_EQ(bytes.size(), kDfrHeaderSize + 4 * 4);
  const std::uint8_t expected_header[] = {'D', 'F', 'R', '1', 1, 0, 2, 0, 0, 0,
                                          2,   0,   0,   0,   1, 0, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data(), expected_header, kDfrHeaderSize), 0);
  for (std::size_t i = kDfrHeaderSize; i < bytes.size(); ++i) EXPECT_EQ(bytes[i], 0);
}

TEST(RasterIo, DfrRandomRoundTripIsBitExact) {
  TempDir dir("dfr_rt");
  CounterRng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(9));
    const int w = 1 + static_cast<int>(rng.below(9));
    const int c = 1 + static_cast<int>(rng.below(4));
    std::vector<double> v(static_cast<std::size_t>(h) * w * c);
    // Interchange is f32: draw values that f32 represents exactly.
    for (double& x : v) x = static_cast<float>(rng.uniform(-1e4, 1e4));
    const Raster r(h, w, c, v);
    write_raster(r, dir / "r.dfr", RasterFormat::kDfr);
    const Raster back = load_raster(dir / "r.dfr", RasterFormat::kDfr);
    ASSERT_EQ(back, r) << "trial " << trial;
  }
}

TEST(RasterIo, PfmRoundTripKeepsTopDownOrder) {
  TempDir dir("pfm_rt");
  CounterRng rng(7);
  for (int c : {1, 3}) {
    std::vector<double> v(5 * 4 * c);
    for (double& x : v) x = static_cast<float>(rng.uniform(0.0, 10.0));
    const Raster r(5, 4, c, v);
    write_raster(r, dir / "r.pfm");
    EXPECT_EQ(load_raster(dir / "r.pfm"), r);
  }
  EXPECT_THROW(write_raster(Raster(2, 2, 2), dir / "bad.pfm"), FormatError);
}

TEST(RasterIo, PfmBigEndianBottomUp) {
  TempDir dir("pfm_be");
  // 1 x 2 wide, 2 rows: file rows bottom-up, big-endian (positive scale).
  std::string header = "Pf\n2 2\n1.0\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  const float file_order[] = {3.f, 4.f, 1.f, 2.f};  // bottom row first
  for (float f : file_order) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int s = 3; s >= 0; --s) bytes.push_back(static_cast<std::uint8_t>((bits >> (8 * s)) & 0xFF));
  }
  dump(dir / "be.pfm", bytes);
  const Raster r = load_raster(dir / "be.pfm", RasterFormat::kPfm);
  EXPECT_EQ(r.at(0, 0), 1.0);
  EXPECT_EQ(r.at(0, 1), 2.0);
  EXPECT_EQ(r.at(1, 0), 3.0);
  EXPECT_EQ(r.at(1, 1), 4.0);
}

TEST(RasterIo, Png16Millimeters) {
  TempDir dir("png16");
  write_raster(Raster(1, 1, 1, 1.5), dir / "a.png", RasterFormat::kPng16);
  EXPECT_EQ(load_raster(dir / "a.png").at(0, 0), 1.5);

  write_raster(Raster(1, 1, 1, 1.2345), dir / "b.png", RasterFormat::kPng16);
  const double q = load_raster(dir / "b.png").at(0, 0);
  EXPECT_TRUE(q == 1.234 || q == 1.235) << q;

  CounterRng rng(3);
  const Raster r = testing::random_raster(rng, 7, 9, 1, 0.0, 65.535);
  write_raster(r, dir / "c.png");
  const Raster back = load_raster(dir / "c.png");
  for (std::size_t i = 0; i < r.pixel_count(); ++i) {
    EXPECT_LE(std::abs(back.at_index(i) - r.at_index(i)), 0.0005 + 1e-12);
  }
}

TEST(RasterIo, Png16RangeErrors) {
  TempDir dir("png16_range");
  EXPECT_THROW(write_raster(Raster(1, 1, 1, 65.6), dir / "a.png"), RangeError);
  EXPECT_THROW(write_raster(Raster(1, 1, 1, -0.5), dir / "b.png"), RangeError);
  EXPECT_THROW(write_raster(Raster(1, 1, 2, 1.0), dir / "c.png"), FormatError);
  EXPECT_FALSE(std::filesystem::exists(dir / "a.png"));
}

TEST(RasterIo, ErrorKinds) {
  TempDir dir("io_errors");
  EXPECT_THROW(load_raster(dir / "missing.dfr"), IoError);

  std::vector<std::uint8_t> bad_magic = {'D', 'F', 'R', '2', 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  dump(dir / "magic.dfr", bad_magic);
  EXPECT_THROW(load_raster(dir / "magic.dfr"), FormatError);

  std::vector<std::uint8_t> truncated = {'D', 'F', 'R', '1', 1, 0, 2, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0};
  dump(dir / "short.dfr", truncated);
  EXPECT_THROW(load_raster(dir / "short.dfr"), FormatError);

  std::vector<std::uint8_t> zero_dims = {'D', 'F', 'R', '1', 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0};
  dump(dir / "zero.dfr", zero_dims);
  EXPECT_THROW(load_raster(dir / "zero.dfr"), FormatError);

  std::vector<std::uint8_t> bad_dtype = {'D', 'F', 'R', '1', 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 7, 0, 0, 0, 0};
  dump(dir / "dtype.dfr", bad_dtype);
  EXPECT_THROW(load_raster(dir / "dtype.dfr"), FormatError);

  std::vector<std::uint8_t> nan_payload = {'D', 'F', 'R', '1', 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0,
                                           0x00, 0x00, 0xC0, 0x7F};
  dump(dir / "nan.dfr", nan_payload);
  EXPECT_THROW(load_raster(dir / "nan.dfr"), ValueError);

  dump(dir / "notpng.png", {1, 2, 3});
  EXPECT_THROW(load_raster(dir / "notpng.png"), FormatError);
  EXPECT_THROW(parse_format("exr"), FormatError);
}

TEST(RasterIo, RgbPngIsNotReadableAsDepth) {
  TempDir dir("rgb8");
  write_png_rgb8(Raster(2, 2, 3, 0.5), dir / "rgb.png");
  EXPECT_THROW(load_raster(dir / "rgb.png"), FormatError);
}

TEST(SparseDepth, MeasuredSet) {
  EXPECT_EQ(to_sparse(Raster(3, 3, 1, 0.0)).measured_count(), 0u);

  std::vector<double> one(9, 0.0);
  one[4] = 3.0;
  const SparseDepth s = to_sparse(Raster(3, 3, 1, one));
  EXPECT_EQ(s.measured_count(), 1u);
  EXPECT_EQ(s.measured_indices().front(), 4u);

  EXPECT_THROW(to_sparse(Raster(1, 2, 1, std::vector<double>{1.0, -0.1})), ValueError);
  EXPECT_THROW(to_sparse(Raster(1, 1, 2, 1.0)), ValueError);
}

TEST(SparseDepth, MeasuredCountMatchesIndependentScan) {
  CounterRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Raster r = testing::random_sparse(rng, 17, 13, 0.2, 0.5, 9.0).raster();
    std::size_t positives = 0;
    for (double v : r.values()) positives += v > 0.0 ? 1 : 0;
    const SparseDepth s = to_sparse(r);
    EXPECT_EQ(s.measured_count(), positives);
    EXPECT_EQ(s.mask().count(), positives);
  }
}

}  // namespace
}  // namespace psd
