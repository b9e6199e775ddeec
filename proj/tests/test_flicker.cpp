#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace wcs {
namespace {

FrameTensor constant_frames(const std::vector<std::uint8_t>& levels, std::size_t H = 8, std::size_t W = 8) {
  FrameTensor f(levels.size(), H, W);
  for (std::size_t t = 0; t < levels.size(); ++t) std::fill(f.frame(t).begin(), f.frame(t).end(), levels[t]);
  return f;
}

FlowField zero_flow(std::size_t maps, std::size_t H = 8, std::size_t W = 8) {
  return FlowField(maps, H, W);
}

std::vector<std::uint8_t> noise_image(std::size_t H, std::size_t W, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> img(H * W);
  for (auto& p : img) p = std::uint8_t(1 + rng() % 250);
  return img;
}

TEST(Warp, ZeroFlowIsIdentity) {
  const auto img = noise_image(6, 9, 1);
  const std::vector<float> flow(6 * 9 * 2, 0.0f);
  const auto w = warp_frame(img, flow, 6, 9);
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_EQ(w.predicted[i], double(img[i]));
    EXPECT_EQ(w.valid[i], 1);
  }
}

TEST(Warp, UniformShiftRightHasZeroInteriorResidual) {
  const std::size_t H = 7, W = 10;
  const auto src = noise_image(H, W, 2);
  std::vector<std::uint8_t> shifted(H * W, 0);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 1; x < W; ++x) shifted[y * W + x] = src[y * W + x - 1];
  std::vector<float> flow(H * W * 2, 0.0f);
  for (std::size_t i = 0; i < H * W; ++i) flow[2 * i] = 1.0f;
  const auto w = warp_frame(src, flow, H, W);
  for (std::size_t y = 0; y < H; ++y) {
    EXPECT_EQ(w.valid[y * W], 0);  // samples x = -1
    for (std::size_t x = 1; x < W; ++x) EXPECT_EQ(w.predicted[y * W + x], double(shifted[y * W + x]));
  }
  EXPECT_EQ(flicker_residual(shifted, w.predicted, w.valid).epsilon, 0.0);
}

TEST(Warp, HalfPixelFlowInterpolates) {
  const std::vector<std::uint8_t> src{0, 100, 200, 0, 100, 200};
  std::vector<float> flow(12, 0.0f);
  flow[2 * 2] = 0.5f;  // pixel (x=2, y=0) samples x = 1.5
  const auto w = warp_frame(src, flow, 2, 3);
  EXPECT_EQ(w.predicted[2], 150.0);
}

TEST(Warp, CheckerboardWithRandomFlowHasResidual) {
  const std::size_t H = 16, W = 16;
  std::vector<std::uint8_t> board(H * W);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) board[y * W + x] = ((x + y) % 2) ? 220 : 30;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> d(-2.0f, 2.0f);
  std::vector<float> flow(H * W * 2);
  for (auto& v : flow) v = d(rng);
  const auto w = warp_frame(board, flow, H, W);
  EXPECT_GT(flicker_residual(board, w.predicted, w.valid).epsilon, 0.0);
}

TEST(Residual, IdenticalFramesGiveZero) {
  const auto img = noise_image(4, 4, 4);
  const std::vector<double> pred(img.begin(), img.end());
  const std::vector<std::uint8_t> valid(16, 1);
  const auto r = flicker_residual(img, pred, valid);
  EXPECT_EQ(r.epsilon, 0.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(Residual, ConstantOffsetOverActualMass) {
  const std::vector<std::uint8_t> actual(25, 110), valid(25, 1);
  const std::vector<double> pred(25, 100.0);
  EXPECT_DOUBLE_EQ(flicker_residual(actual, pred, valid).epsilon, 10.0 / 110.0);
}

TEST(Residual, ClampedPerPixel) {
  const std::vector<std::uint8_t> actual(4, 10), valid(4, 1);
  const std::vector<double> pred(4, 250.0);
  const auto r = flicker_residual(actual, pred, valid, 0.2);
  EXPECT_EQ(r.epsilon, 1.0);  // 51 / 10 capped at 1
  EXPECT_DOUBLE_EQ(r.raw, 24.0);
}

TEST(Residual, AllZeroActualIsDegenerate) {
  const std::vector<std::uint8_t> actual(9, 0), valid(9, 1);
  const std::vector<double> pred(9, 30.0);
  const auto r = flicker_residual(actual, pred, valid);
  EXPECT_EQ(r.epsilon, 0.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(ComputeFp, StaticVideoIsZero) {
  const auto s = compute_fp(constant_frames({90, 90, 90, 90}), zero_flow(3), nullptr);
  EXPECT_EQ(s.fp, 0.0);
  EXPECT_EQ(s.residuals.size(), 3u);
}

TEST(ComputeFp, OneHalfResidualAmongFourTransitions) {
  const auto s = compute_fp(constant_frames({50, 50, 50, 100, 100}), zero_flow(4), nullptr);
  EXPECT_EQ(s.residuals[2], 0.5);
  EXPECT_EQ(s.fp, 0.125);
}

TEST(ComputeFp, AlternatingBrightnessNearAmplitudeOverLevel) {
  const auto clean = compute_fp(constant_frames({100, 100, 100, 100, 100, 100}), zero_flow(5), nullptr);
  const auto flick = compute_fp(constant_frames({100, 120, 100, 120, 100, 120}), zero_flow(5), nullptr);
  for (double e : flick.residuals) {
    EXPECT_GE(e, 20.0 / 120.0 - 1e-15);
    EXPECT_LE(e, 20.0 / 100.0 + 1e-15);
  }
  EXPECT_GT(flick.fp, clean.fp);
}

TEST(ComputeFp, CutsAreFlaggedAndOptionallyExcluded) {
  const auto frames = constant_frames({40, 40, 200, 200});
  FlickerParams p;
  const auto kept = compute_fp(frames, zero_flow(3), nullptr, p);
  EXPECT_EQ(kept.cut_flags, (std::vector<std::uint8_t>{0, 1, 0}));
  EXPECT_GT(kept.fp, 0.0);
  p.cut_exclusion = true;
  EXPECT_EQ(compute_fp(frames, zero_flow(3), nullptr, p).fp, 0.0);
}

TEST(ComputeFp, MovingObjectsAreMaskedInStaticRegionMode) {
  const Bundle b = sim::simulate(sim::standard_scene());
  EXPECT_EQ(compute_fp(*b.frames, *b.flow, &b.tracks).fp, 0.0);
  FlickerParams off;
  off.static_region_mode = false;
  const auto unmasked = compute_fp(*b.frames, *b.flow, &b.tracks, off);
  EXPECT_GE(unmasked.fp, 0.0);
  EXPECT_LE(*std::max_element(unmasked.mask_coverage.begin(), unmasked.mask_coverage.end()), 1.0);
}

TEST(ComputeFp, InconsistentShapesAreRejected) {
  EXPECT_THROW(compute_fp(constant_frames({1, 2, 3}), zero_flow(3), nullptr), ValidationError);
}

}  // namespace
}  // namespace wcs
