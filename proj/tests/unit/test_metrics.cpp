#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "psd/error.hpp"
#include "psd/metrics.hpp"
#include "psd/raster_io.hpp"
#include "test_support.hpp"

namespace psd {
namespace {

TEST(Metrics, PerfectPrediction) {
  const Raster gt(3, 3, 1, 2.0);
  const MetricsReport r = compute_metrics(gt, gt);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_EQ(r.rel, 0.0);
  EXPECT_EQ(r.delta.at(1.25), 100.0);
  EXPECT_EQ(r.pixel_count, 9u);
}

TEST(Metrics, TwoPixelHandCase) {
  const Raster gt(1, 2, 1, std::vector<double>{1.0, 2.0});
  const Raster pred(1, 2, 1, std::vector<double>{1.1, 1.8});
  const MetricsReport r = compute_metrics(pred, gt);
  EXPECT_NEAR(r.mae, 150.0, 0.01);
  EXPECT_NEAR(r.rmse, 158.11, 0.01);
  EXPECT_NEAR(r.rel, 10.0, 0.01);
  EXPECT_NEAR(r.delta.at(1.25), 100.0, 0.01);
  ASSERT_EQ(r.delta.size(), 3u);
  EXPECT_TRUE(r.delta.count(1.25 * 1.25) && r.delta.count(1.25 * 1.25 * 1.25));
}

TEST(Metrics, OnlyPositiveGroundTruthAndMaskCount) {
  const Raster gt(1, 4, 1, std::vector<double>{0.0, 1.0, 2.0, 4.0});
  const Raster pred(1, 4, 1, std::vector<double>{9.0, 1.0, 3.0, 4.0});
  Mask m(1, 4, true);
  m.bits[3] = 0;
  const MetricsReport r = compute_metrics(pred, gt, &m);
  EXPECT_EQ(r.pixel_count, 2u);
  EXPECT_DOUBLE_EQ(r.mae, 500.0);
  EXPECT_DOUBLE_EQ(r.delta.at(1.25), 50.0);
  EXPECT_THROW(compute_metrics(pred, Raster(1, 4, 1, 0.0)), EmptyMask);
  EXPECT_THROW(compute_metrics(Raster(2, 2, 1), gt), ValueError);
}

TEST(Metrics, MatchesNaiveLoopAndInvariants) {
  CounterRng rng(71);
  const std::vector<double> thetas = {1.01, 1.05, 1.25, 1.5625, 1.953125, 4.0};
  for (int t = 0; t < 1000; ++t) {
    const int h = 1 + static_cast<int>(rng.below(8)), w = 1 + static_cast<int>(rng.below(8));
    Raster gt = testing::random_raster(rng, h, w, 1, 0.1, 10.0);
    const Raster pred = testing::random_raster(rng, h, w, 1, 0.1, 10.0);
    const MetricsReport r = compute_metrics(pred, gt, nullptr, thetas);
    double a = 0, s = 0, rel = 0;
    std::vector<int> hit(thetas.size(), 0);
    const int n = h * w;
    for (int i = 0; i < n; ++i) {
      const double d = gt.at_index(i) - pred.at_index(i);
      a += std::fabs(d);
      s += d * d;
      rel += std::fabs(d) / gt.at_index(i);
      const double ratio = std::max(pred.at_index(i) / gt.at_index(i), gt.at_index(i) / pred.at_index(i));
      for (std::size_t k = 0; k < thetas.size(); ++k) hit[k] += ratio < thetas[k] ? 1 : 0;
    }
    EXPECT_NEAR(r.mae, a / n * 1000, 1e-12 * std::max(1.0, r.mae));
    EXPECT_NEAR(r.rmse, std::sqrt(s / n) * 1000, 1e-12 * std::max(1.0, r.rmse));
    EXPECT_NEAR(r.rel, rel / n * 100, 1e-12 * std::max(1.0, r.rel));
    EXPECT_GE(r.rmse, r.mae * (1 - 1e-15));
    double prev = -1.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      const double pct = r.delta.at(thetas[k]);
      EXPECT_DOUBLE_EQ(pct, 100.0 * hit[k] / n);
      EXPECT_GE(pct, prev);
      EXPECT_LE(pct, 100.0);
      prev = pct;
    }
  }
}

TEST(Metrics, TextAndJsonReports) {
  const Raster gt(1, 2, 1, std::vector<double>{1.0, 2.0});
  const Raster pred(1, 2, 1, std::vector<double>{1.1, 1.8});
  const MetricsReport r = compute_metrics(pred, gt);
  const std::string text = format_metrics_text(r);
  EXPECT_NE(text.find("mae=150"), std::string::npos);
  EXPECT_NE(text.find("delta_1.25=100\n"), std::string::npos);
  EXPECT_NE(text.find("pixel_count=2\n"), std::string::npos);
  const std::string line = format_metrics_json(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto j = nlohmann::json::parse(line);
  EXPECT_NEAR(j.at("rmse").get<double>(), 158.11, 0.01);
  EXPECT_EQ(j.at("pixel_count").get<int>(), 2);
}

TEST(Metrics, ErrorMapAndSidecar) {
  testing::TempDir dir("errmap");
  const Raster gt(4, 4, 1, 2.0);
  const Raster pred(4, 4, 1, 2.5);
  write_error_map(pred, gt, dir / "err.png", 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "err.png"));
  std::ifstream side(dir / "err.png.txt");
  std::string all((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
  EXPECT_NE(all.find("1"), std::string::npos);
}

}  // namespace
}  // namespace psd
