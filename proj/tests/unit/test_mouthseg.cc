#include <gtest/gtest.h>

#include "facegest/errors.h"
#include "facegest/mouthseg.h"
#include "generators.h"
#include "oracles.h"

using namespace facegest;
using mouthseg::BlobMask;
using mouthseg::SegmentationParams;

namespace {

BlobMask filled_rect(int w, int h, int x0, int y0, int rw, int rh) {
  BlobMask m(w, h);
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) m.set(x, y);
  return m;
}

}  // namespace

TEST(ThresholdShadow, WhiteAndBlack) {
  SegmentationParams p;
  p.intensity_threshold = 60;
  p.red_threshold = 60;
  frameio::Frame white(8, 8, 3);
  for (auto& v : white.pixels()) v = 255;
  EXPECT_TRUE(mouthseg::threshold_shadow(white, p).none());
  frameio::Frame black(8, 8, 3);
  EXPECT_EQ(mouthseg::threshold_shadow(black, p).count(), 64u);
}

TEST(ThresholdShadow, CheckerboardOfBlackAndRed) {
  SegmentationParams p;
  p.intensity_threshold = 60;
  p.red_threshold = 60;
  frameio::Frame f(6, 6, 3);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x)
      if ((x + y) % 2) f.at(x, y, 0) = 200;
  const auto mask = mouthseg::threshold_shadow(f, p);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(mask.test(x, y), (x + y) % 2 == 0);
}

TEST(ThresholdShadow, RedRuleOnlyForColor) {
  SegmentationParams p;
  p.intensity_threshold = 100;
  p.red_threshold = 10;
  frameio::Frame rgb(1, 1, 3, {50, 50, 50});
  EXPECT_TRUE(mouthseg::threshold_shadow(rgb, p).none());
  frameio::Frame gray(1, 1, 1, {50});
  EXPECT_EQ(mouthseg::threshold_shadow(gray, p).count(), 1u);
}

TEST(LargestComponent, PicksBiggerBlobExactly) {
  oracle::Grid g(20, std::vector<int>(30, 0));
  for (int y = 2; y < 7; ++y)
    for (int x = 2; x < 12; ++x) g[y][x] = 1;  // 50
  for (int y = 10; y < 13; ++y)
    for (int x = 15; x < 25; ++x) g[y][x] = 1;  // 30
  SegmentationParams p;
  p.connectivity = 4;
  const auto got = mouthseg::largest_component(gen::to_mask(g), p);
  EXPECT_EQ(got, gen::from_pixels(30, 20, oracle::largest(g, 4)));
  EXPECT_EQ(got.count(), 50u);
}

TEST(LargestComponent, TieGoesToComponentHoldingOrigin) {
  const oracle::Grid g = {{1, 1, 0, 0}, {1, 0, 0, 1}, {0, 0, 1, 1}};
  SegmentationParams p;
  p.connectivity = 8;
  const auto got = mouthseg::largest_component(gen::to_mask(g), p);
  EXPECT_EQ(got.count(), 3u);
  EXPECT_TRUE(got.test(0, 0));
  EXPECT_FALSE(got.test(3, 2));
}

TEST(LargestComponent, EmptyAndMinArea) {
  SegmentationParams p;
  EXPECT_TRUE(mouthseg::largest_component(BlobMask(5, 5), p).none());
  p.min_area = 101;
  EXPECT_TRUE(mouthseg::largest_component(filled_rect(20, 20, 0, 0, 10, 10), p).none());
  p.min_area = 100;
  EXPECT_EQ(mouthseg::largest_component(filled_rect(20, 20, 0, 0, 10, 10), p).count(), 100u);
}

TEST(LargestComponent, FourVersusEightConnectivity) {
  const oracle::Grid g = {{1, 0}, {0, 1}};
  SegmentationParams p;
  p.connectivity = 8;
  EXPECT_EQ(mouthseg::largest_component(gen::to_mask(g), p).count(), 2u);
  p.connectivity = 4;
  EXPECT_EQ(mouthseg::largest_component(gen::to_mask(g), p).count(), 1u);
}

TEST(ShapeStats, FilledSquare) {
  const auto s = mouthseg::shape_stats(filled_rect(32, 32, 5, 7, 10, 10));
  EXPECT_EQ(s.area, 100);
  EXPECT_EQ(s.bbox_w, 10);
  EXPECT_EQ(s.bbox_h, 10);
  EXPECT_DOUBLE_EQ(s.aspect_ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.mu20, 8.25);
  EXPECT_DOUBLE_EQ(s.mu02, 8.25);
  EXPECT_DOUBLE_EQ(s.mu11, 0.0);
  EXPECT_FALSE(s.empty);
}

TEST(ShapeStats, WideRectangle) {
  const auto s = mouthseg::shape_stats(filled_rect(40, 40, 0, 0, 20, 10));
  EXPECT_DOUBLE_EQ(s.aspect_ratio, 2.0);
  EXPECT_DOUBLE_EQ(s.mu20, 33.25);
  EXPECT_DOUBLE_EQ(s.mu02, 8.25);
  EXPECT_DOUBLE_EQ(s.principal_angle, 0.0);
  EXPECT_DOUBLE_EQ(s.lambda1, 33.25);
  EXPECT_DOUBLE_EQ(s.lambda2, 8.25);
}

TEST(ShapeStats, SinglePixelAndEmpty) {
  const auto one = mouthseg::shape_stats(filled_rect(5, 5, 2, 3, 1, 1));
  EXPECT_EQ(one.bbox_w, 1);
  EXPECT_EQ(one.bbox_h, 1);
  EXPECT_DOUBLE_EQ(one.aspect_ratio, 1.0);
  EXPECT_DOUBLE_EQ(one.mu20 + one.mu02 + one.mu11, 0.0);
  EXPECT_DOUBLE_EQ(one.principal_angle, 0.0);
  const auto none = mouthseg::shape_stats(BlobMask(5, 5));
  EXPECT_TRUE(none.empty);
  EXPECT_EQ(none, mouthseg::MouthShape{});
}

TEST(ShapeStats, RandomBlobMatchesDirectSummation) {
  gen::Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const auto pixels = gen::random_walk_blob(rng, 64, 64, 800);
    const auto s = mouthseg::shape_stats(gen::from_pixels(64, 64, pixels));
    const auto o = oracle::direct_stats(pixels);
    EXPECT_EQ(s.area, o.area);
    EXPECT_EQ(s.bbox_w, o.bbox_w);
    EXPECT_EQ(s.bbox_h, o.bbox_h);
    EXPECT_NEAR(s.centroid.x, o.cx, 1e-9);
    EXPECT_NEAR(s.centroid.y, o.cy, 1e-9);
    EXPECT_NEAR(s.mu20, o.mu20, 1e-9);
    EXPECT_NEAR(s.mu02, o.mu02, 1e-9);
    EXPECT_NEAR(s.mu11, o.mu11, 1e-9);
  }
}

TEST(PrincipalAxes, TransposeGivesNinetyDegrees) {
  const auto wide = mouthseg::shape_stats(filled_rect(40, 40, 0, 0, 20, 10));
  const auto tall = mouthseg::shape_stats(filled_rect(40, 40, 0, 0, 10, 20));
  const auto a = mouthseg::principal_axes(tall);
  EXPECT_DOUBLE_EQ(a.angle_deg, 90.0);
  EXPECT_DOUBLE_EQ(a.lambda1, wide.lambda1);
  EXPECT_DOUBLE_EQ(a.lambda2, wide.lambda2);
}

TEST(PrincipalAxes, DiagonalBlobAndEmpty) {
  BlobMask m(10, 10);
  for (int i = 0; i < 10; ++i) m.set(i, i);
  const auto a = mouthseg::principal_axes(mouthseg::shape_stats(m));
  EXPECT_NEAR(a.angle_deg, 45.0, 1e-12);
  EXPECT_NEAR(a.lambda2, 0.0, 1e-12);
  EXPECT_THROW(mouthseg::principal_axes(mouthseg::MouthShape{}), DomainError);
}

TEST(PrincipalAxes, MatchesJacobiEigenvalues) {
  gen::Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto s = mouthseg::shape_stats(gen::from_pixels(48, 48, gen::random_walk_blob(rng, 48, 48, 300)));
    const auto [l1, l2] = oracle::eigen2(s.mu20, s.mu11, s.mu02);
    EXPECT_NEAR(s.lambda1, l1, 1e-9);
    EXPECT_NEAR(s.lambda2, l2, 1e-9);
  }
}

TEST(MouthShapeJson, ExactFieldNamesAndRoundTrip) {
  const auto s = mouthseg::shape_stats(filled_rect(32, 32, 3, 4, 7, 5));
  const nlohmann::json j = s;
  for (const char* k : {"area", "bbox_w", "bbox_h", "aspect_ratio", "centroid", "mu20", "mu02", "mu11",
                        "principal_angle", "lambda1", "lambda2", "empty"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j.size(), 12u);
  EXPECT_EQ(j.get<mouthseg::MouthShape>(), s);
}

TEST(SegmentationParams, Validation) {
  SegmentationParams p;
  p.connectivity = 6;
  EXPECT_THROW(p.validate(), DataError);
  p = {};
  p.intensity_threshold = 256;
  EXPECT_THROW(p.validate(), DataError);
  p = {};
  p.min_area = -1;
  EXPECT_THROW(p.validate(), DataError);
  EXPECT_THROW(nlohmann::json({{"connectivity", 5}}).get<SegmentationParams>(), DataError);
}
