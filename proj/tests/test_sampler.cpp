#include <algorithm>
#include <array>
#include <random>

#include <gtest/gtest.h>

#include "cmrqa/patch_sampler.hpp"
#include "cmrqa/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cmrqa;

namespace {

BinaryImage block(std::size_t rows, std::size_t cols, std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) {
  BinaryImage m(rows, cols, 0);
  for (std::size_t r = r0; r < r0 + h; ++r)
    for (std::size_t c = c0; c < c0 + w; ++c) m(r, c) = 1;
  return m;
}

}  // namespace

TEST(RoiMask, BlockIsReturnedVerbatim) {
  auto img = block(64, 64, 10, 20, 20, 20);
  std::vector<unsigned char> data(64 * 64 * 2, 0);
  std::copy(img.values().begin(), img.values().end(), data.begin() + 64 * 64);
  const MaskVolume m({64, 64, 2}, data);
  const auto roi = roi_for_slice(m, 1);
  EXPECT_EQ(roi.source(), RoiSource::mask);
  EXPECT_EQ(roi.pixel_count(), 400u);
  EXPECT_EQ(roi.foreground(), img);
}

TEST(RoiMask, EmptySliceFallsBackToCentredSquare) {
  const auto m = MaskVolume::zeros({400, 400, 1});
  const auto roi = roi_for_slice(m, 0);
  EXPECT_EQ(roi.source(), RoiSource::fallback_center);
  EXPECT_EQ(roi.pixel_count(), 112u * 112u);
  EXPECT_EQ(roi.foreground(), block(400, 400, 144, 144, 112, 112));
}

TEST(RoiMask, SinglePixel) {
  BinaryImage img(30, 30, 0);
  img(7, 9) = 1;
  const auto roi = roi_from_image(img);
  EXPECT_EQ(roi.source(), RoiSource::mask);
  EXPECT_EQ(roi.pixel_count(), 1u);
}

TEST(RoiMask, NeverEmptyEvenForTinySlices) {
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    const auto roi = roi_from_image(BinaryImage(n, n + 1, 0));
    EXPECT_GE(roi.pixel_count(), 1u);
  }
  EXPECT_THROW(roi_for_slice(MaskVolume::zeros({4, 4, 2}), 2), ValidationError);
}

TEST(Coverage, Examples) {
  const RoiSlice inside(block(300, 300, 100, 100, 10, 10), RoiSource::mask);
  EXPECT_EQ(coverage(50, 50, 224, inside), 1.0);
  EXPECT_EQ(coverage(0, 150, 100, inside), 0.0);

  const RoiSlice strip(block(320, 320, 150, 10, 10, 300), RoiSource::mask);
  EXPECT_DOUBLE_EQ(coverage(50, 10, 224, strip), 224.0 * 10 / 3000);
  EXPECT_NEAR(coverage(50, 10, 224, strip), 0.7467, 1e-4);
}

TEST(Coverage, MatchesPixelCount) {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 30; ++n) {
    BinaryImage m(40, 50, 0);
    for (auto& v : m.values()) v = (rng() % 5 == 0);
    m(0, 0) = 1;
    const RoiSlice roi(m, RoiSource::mask);
    const CoverageIndex index(roi);
    for (int t = 0; t < 20; ++t) {
      const long r = static_cast<long>(rng() % 60) - 10, c = static_cast<long>(rng() % 70) - 10;
      const std::size_t P = 1 + rng() % 30;
      EXPECT_DOUBLE_EQ(index.coverage(r, c, P), oracle::coverage(m, r, c, P));
    }
  }
}

TEST(Sampler, SingleCentrePixelAlwaysFullyCovered) {
  BinaryImage m(300, 300, 0);
  m(150, 150) = 1;
  const RoiSlice roi(m, RoiSource::mask);
  SamplerConfig cfg;
  const auto origins = sample_origins(roi, 5, cfg, 1);
  ASSERT_EQ(origins.size(), 5u);
  for (const auto& o : origins) {
    EXPECT_FALSE(o.fallback);
    EXPECT_EQ(coverage(static_cast<long>(o.row), static_cast<long>(o.col), 224, roi), 1.0);
  }
}

TEST(Sampler, StripIsInfeasibleAndFallsBack) {
  const auto m = block(320, 320, 150, 10, 10, 300);
  const RoiSlice roi(m, RoiSource::mask);
  // exhaustive: no origin reaches 0.8
  const CoverageIndex index(roi);
  double best = 0;
  for (long r = 0; r <= 320 - 224; ++r)
    for (long c = 0; c <= 320 - 224; ++c) best = std::max(best, index.coverage(r, c, 224));
  EXPECT_LT(best, 0.8);
  EXPECT_DOUBLE_EQ(best, 224.0 / 300.0);

  SamplerConfig cfg;
  const auto origins = sample_origins(roi, 3, cfg, 9);
  ASSERT_EQ(origins.size(), 3u);
  // centroid (154.5, 159.5): window centred there is (43, 48), clamped to the slice
  for (const auto& o : origins) {
    EXPECT_TRUE(o.fallback);
    EXPECT_EQ(o.row, 43u);
    EXPECT_EQ(o.col, 48u);
  }
}

TEST(Sampler, NonFallbackPatchesMeetThreshold) {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 40; ++n) {
    const std::size_t H = 64 + rng() % 300, W = 64 + rng() % 300;
    const std::size_t h = 1 + rng() % 120, w = 1 + rng() % 120;
    const auto m = block(H, W, rng() % (H - std::min(h, H) + 1), rng() % (W - std::min(w, W) + 1), std::min(h, H),
                         std::min(w, W));
    const RoiSlice roi(m, RoiSource::mask);
    SamplerConfig cfg;
    cfg.seed = n;
    const auto pad = Padding::for_slice(H, W, cfg.patch_size);
    for (const auto& o : sample_origins(roi, 10, cfg, n)) {
      EXPECT_LE(o.row + cfg.patch_size, pad.rows);
      EXPECT_LE(o.col + cfg.patch_size, pad.cols);
      if (o.fallback) continue;
      const double cov = oracle::coverage(m, static_cast<long>(o.row) - static_cast<long>(pad.top),
                                          static_cast<long>(o.col) - static_cast<long>(pad.left), cfg.patch_size);
      EXPECT_GE(cov, 0.8);
    }
  }
}

TEST(Sampler, FeasibleSmallSlicesFindOrigins) {
  // ROI comfortably inside a window: exhaustive enumeration says feasible, and
  // the sampler must not fall back.
  std::mt19937_64 rng(22);
  for (int n = 0; n < 30; ++n) {
    const std::size_t H = 40 + rng() % 30, W = 40 + rng() % 30;
    const auto m = block(H, W, 5 + rng() % 10, 5 + rng() % 10, 5 + rng() % 10, 5 + rng() % 10);
    const RoiSlice roi(m, RoiSource::mask);
    SamplerConfig cfg;
    cfg.patch_size = 32;
    bool feasible = false;
    for (long r = 0; r + 32 <= static_cast<long>(H) && !feasible; ++r)
      for (long c = 0; c + 32 <= static_cast<long>(W) && !feasible; ++c)
        feasible = oracle::coverage(m, r, c, 32) >= 0.8;
    ASSERT_TRUE(feasible);
    for (const auto& o : sample_origins(roi, 8, cfg, n)) EXPECT_FALSE(o.fallback);
  }
}

TEST(Sampler, DeterministicPerStream) {
  const RoiSlice roi(block(400, 420, 150, 160, 60, 70), RoiSource::mask);
  SamplerConfig cfg;
  cfg.seed = 77;
  const auto a = sample_origins(roi, 20, cfg, 5), b = sample_origins(roi, 20, cfg, 5);
  EXPECT_EQ(a, b);
  const auto c = sample_origins(roi, 20, cfg, 6);
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == c[i];
  EXPECT_LT(same, 2u);
  cfg.seed = 78;
  EXPECT_NE(sample_origins(roi, 20, cfg, 5), a);
}

TEST(Sampler, StreamIdsSeparateSubjectsAndSlices) {
  EXPECT_NE(slice_stream_id("a", 0), slice_stream_id("a", 1));
  EXPECT_NE(slice_stream_id("a", 0), slice_stream_id("b", 0));
  EXPECT_EQ(slice_stream_id("subject", 3), slice_stream_id("subject", 3));
}

TEST(Sampler, SmallSliceIsPaddedSymmetrically) {
  SliceImage s(100, 51, 0.0);
  for (std::size_t r = 0; r < 100; ++r)
    for (std::size_t c = 0; c < 51; ++c) s(r, c) = 1.0 + static_cast<double>(r * 51 + c);
  const auto pad = Padding::for_slice(100, 51, 224);
  EXPECT_EQ(pad.top, 62u);
  EXPECT_EQ(pad.left, 86u);
  const RoiSlice roi(block(100, 51, 40, 20, 10, 10), RoiSource::mask);
  SamplerConfig cfg;
  const auto patches = sample_patches(s, roi, 4, cfg, 3, {"x", 0, Representation::intensity});
  for (const auto& p : patches) {
    EXPECT_EQ(p.origin.row, 0u);
    EXPECT_EQ(p.origin.col, 0u);
    EXPECT_FALSE(p.fallback());
    EXPECT_EQ(p.pixels(62, 86), s(0, 0));
    EXPECT_EQ(p.pixels(62 + 99, 86 + 50), s(99, 50));
    EXPECT_EQ(p.pixels(61, 86), 0.0);
    EXPECT_EQ(p.pixels(62, 85), 0.0);
    EXPECT_EQ(p.pixels(62 + 100, 86), 0.0);
  }
}

TEST(Sampler, PatchPixelsAreWindowOfSlice) {
  std::mt19937_64 rng(30);
  const auto s = test::random_image(rng, 260, 300);
  const RoiSlice roi(block(260, 300, 100, 120, 40, 40), RoiSource::mask);
  SamplerConfig cfg;
  for (const auto& p : sample_patches(s, roi, 6, cfg, 12, {"y", 4, Representation::gradmag})) {
    EXPECT_EQ(p.slice_index, 4u);
    EXPECT_EQ(p.representation, Representation::gradmag);
    EXPECT_EQ(p.subject_id, "y");
    for (std::size_t r = 0; r < 224; r += 17)
      for (std::size_t c = 0; c < 224; c += 13) EXPECT_EQ(p.pixels(r, c), s(p.origin.row + r, p.origin.col + c));
  }
}

TEST(Sampler, ValidatesConfig) {
  const RoiSlice roi(block(10, 10, 2, 2, 2, 2), RoiSource::mask);
  SamplerConfig cfg;
  cfg.coverage_threshold = 0.0;
  EXPECT_THROW(sample_origins(roi, 1, cfg, 0), ValidationError);
  cfg = {};
  EXPECT_THROW(sample_origins(roi, 0, cfg, 0), ValidationError);
  cfg.patch_size = 0;
  EXPECT_THROW(sample_origins(roi, 1, cfg, 0), ValidationError);
}

TEST(Rng, BelowIsInRangeAndUsesEveryValue) {
  StreamRng rng(1, 2);
  std::array<int, 7> hits{};
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_EQ(rng.below(1), 0u);
}
