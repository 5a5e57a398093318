#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace dnsp;
using dnsp::testing::checkerboard;
using dnsp::testing::max_abs_diff;
using dnsp::testing::uniform_image;

namespace {

double patch_score(const Image& img, std::size_t r, std::size_t c, std::size_t p) {
    return frobenius_sq(conv2d_same(crop(img, r, c, p, p), laplacian_kernel(), PaddingMode::Zero));
}

struct Best {
    std::size_t row, col;
    double score;
};

// Exhaustive scan, first occurrence wins ties.
std::pair<Best, Best> brute_select(const Image& img, std::size_t p) {
    Best hi{0, 0, -1.0}, lo{0, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t r = 0; r + p <= img.height(); ++r)
        for (std::size_t c = 0; c + p <= img.width(); ++c) {
            const double s = patch_score(img, r, c, p);
            if (s > hi.score) hi = {r, c, s};
            if (s < lo.score) lo = {r, c, s};
        }
    return {hi, lo};
}

} // namespace

TEST(SimulateLr, ConstantImageStaysConstant) {
    const Image c(12, 16, 0.4);
    for (std::size_t s : {1u, 2u, 4u})
        for (double sigma : {0.5, 1.0, 2.0}) EXPECT_LE(max_abs_diff(simulate_lr(c, s, sigma), c), 1e-12);
}

TEST(SimulateLr, NearIdentityWithoutDecimation) {
    const Image img = uniform_image(10, 10, 1);
    EXPECT_LE(max_abs_diff(simulate_lr(img, 1, 0.1), img), 1e-3);
}

TEST(SimulateLr, QualityDropsWithBlur) {
    const Image hr = make_textured_image(64, 64, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {0.5, 1.0, 1.5, 2.0}) {
        const Image lr = simulate_lr(hr, 2, sigma);
        EXPECT_EQ(lr.height(), 64u);
        const double p = psnr(clamp01(lr), hr);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(SimulateLr, NonDivisibleThrows) {
    EXPECT_THROW(simulate_lr(Image(9, 8), 2, 1.0), ArgumentError);
}

TEST(ExtractPatches, Counts) {
    const Image a = uniform_image(40, 40, 1);
    EXPECT_EQ(extract_patches(a, a, 40, 20).size(), 1u);
    const Image b = uniform_image(80, 80, 2);
    EXPECT_EQ(extract_patches(b, b, 40, 40).size(), 4u);
    EXPECT_EQ(extract_patches(b, b, 40, 20).size(), 9u);
    // trailing window clamped to the border: origins 0, 30, 60, 61
    const Image c = uniform_image(101, 40, 3);
    EXPECT_EQ(extract_patches(c, c, 40, 30).size(), 4u);
}

TEST(ExtractPatches, AlignmentAndOrder) {
    const Image x = uniform_image(50, 60, 4);
    const Image y = uniform_image(50, 60, 5);
    const auto pairs = extract_patches(x, y, 20, 15);
    const auto rows = window_origins(50, 20, 15);
    const auto cols = window_origins(60, 20, 15);
    EXPECT_EQ(rows, (std::vector<std::size_t>{0, 15, 30}));
    EXPECT_EQ(cols, (std::vector<std::size_t>{0, 15, 30, 40}));
    ASSERT_EQ(pairs.size(), rows.size() * cols.size());
    std::size_t k = 0;
    for (std::size_t r : rows)
        for (std::size_t c : cols) {
            EXPECT_EQ(pairs[k].x_s, crop(x, r, c, 20, 20));
            EXPECT_EQ(pairs[k].y_g, crop(y, r, c, 20, 20));
            ++k;
        }
}

TEST(ExtractPatches, Errors) {
    const Image a(30, 30);
    EXPECT_THROW(extract_patches(a, a, 40, 20), ArgumentError);
    EXPECT_THROW(extract_patches(a, Image(30, 31), 10, 5), DimensionError);
    EXPECT_THROW(extract_patches(a, a, 10, 0), ArgumentError);
}

TEST(WindowScores, MatchBruteForce) {
    std::mt19937_64 rng(6);
    for (int draw = 0; draw < 5; ++draw) {
        const Image img = uniform_image(14, 17, rng);
        const std::size_t p = 3 + static_cast<std::size_t>(draw) * 2;
        const auto scores = window_laplacian_scores(img, p);
        const std::size_t nc = 17 - p + 1;
        for (std::size_t r = 0; r + p <= 14; ++r)
            for (std::size_t c = 0; c + p <= 17; ++c)
                EXPECT_NEAR(scores[r * nc + c], patch_score(img, r, c, p), 1e-11);
    }
}

TEST(SelectSharpSmooth, MatchesBruteForceOracle) {
    std::vector<Image> images;
    for (std::uint64_t s = 0; s < 4; ++s) images.push_back(make_textured_image(36, 30, s));
    const auto sel = select_sharp_smooth(images, 12, {});
    ASSERT_EQ(sel.sharp.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto [hi, lo] = brute_select(images[i], 12);
        EXPECT_NEAR(sel.sharp_records[i].score, hi.score, 1e-9 * hi.score);
        EXPECT_NEAR(sel.smooth_records[i].score, lo.score, 1e-9 * std::max(1.0, lo.score));
        EXPECT_EQ(sel.sharp_records[i].image, i);
        EXPECT_EQ(sel.sharp[i], crop(images[i], sel.sharp_records[i].row, sel.sharp_records[i].col, 12, 12));
        EXPECT_EQ(sel.smooth[i], crop(images[i], sel.smooth_records[i].row, sel.smooth_records[i].col, 12, 12));
    }
}

TEST(SelectSharpSmooth, SingleWindowImage) {
    const Image c(40, 40, 0.5);
    const auto sel = select_sharp_smooth({c}, 40, {});
    ASSERT_EQ(sel.sharp.size(), 1u);
    EXPECT_EQ(sel.sharp[0], c);
    EXPECT_EQ(sel.smooth[0], c);
    EXPECT_EQ(sel.sharp_records[0].row, 0u);
    EXPECT_EQ(sel.smooth_records[0].col, 0u);
}

TEST(SelectSharpSmooth, CheckerboardBlockIsSharpest) {
    Image img(100, 90, 0.5);
    const Image block = checkerboard(40, 40, 0.9, 0.1);
    for (std::size_t r = 0; r < 40; ++r)
        for (std::size_t c = 0; c < 40; ++c) img(30 + r, 20 + c) = block(r, c);
    const auto sel = select_sharp_smooth({img}, 40, {});
    EXPECT_EQ(sel.sharp_records[0].row, 30u);
    EXPECT_EQ(sel.sharp_records[0].col, 20u);
    EXPECT_EQ(sel.sharp[0], block);
}

TEST(SelectSharpSmooth, TiesGoToFirstWindow) {
    // every window of a constant image scores the same
    const auto sel = select_sharp_smooth({Image(50, 45, 0.3)}, 40, {});
    EXPECT_EQ(sel.sharp_records[0].row, 0u);
    EXPECT_EQ(sel.sharp_records[0].col, 0u);
    EXPECT_EQ(sel.smooth_records[0].row, 0u);
    EXPECT_EQ(sel.smooth_records[0].col, 0u);
}

TEST(SelectSharpSmooth, Exclusions) {
    std::vector<Image> images;
    for (std::uint64_t s = 0; s < 5; ++s) images.push_back(make_textured_image(40, 40, s));
    const auto one = select_sharp_smooth(images, 40, {0, 1, 3, 4});
    ASSERT_EQ(one.sharp.size(), 1u);
    EXPECT_EQ(one.sharp_records[0].image, 2u);
    EXPECT_THROW(select_sharp_smooth(images, 40, {0, 1, 2, 3, 4}), ArgumentError);
    EXPECT_THROW(select_sharp_smooth({}, 40, {}), ArgumentError);
    EXPECT_THROW(select_sharp_smooth(images, 41, {}), ArgumentError);
}

TEST(BuildDataset, PairsAndPatchSets) {
    std::vector<Image> hr;
    for (std::uint64_t s = 0; s < 3; ++s) hr.push_back(make_textured_image(81, 80, s));
    DatasetOptions opt;
    const PatchDataset ds = build_dataset(hr, opt);
    EXPECT_EQ(ds.pairs.size(), 3u * 9);
    EXPECT_EQ(ds.sharp.size(), 3u);
    EXPECT_EQ(ds.smooth.size(), 3u);
    const Image gt = crop_to_multiple(hr[0], 2);
    EXPECT_EQ(ds.pairs[0].y_g, crop(gt, 0, 0, 40, 40));
    EXPECT_EQ(ds.pairs[0].x_s, crop(simulate_lr(gt, 2, 1.0), 0, 0, 40, 40));
    opt.select_patches = false;
    EXPECT_TRUE(build_dataset(hr, opt).sharp.empty());
}

TEST(TexturedImage, RangeAndDeterminism) {
    const Image a = make_textured_image(80, 80, 1000);
    EXPECT_EQ(a, make_textured_image(80, 80, 1000));
    EXPECT_NE(a, make_textured_image(80, 80, 1001));
    for (double v : a.values()) {
        EXPECT_GE(v, 0.05);
        EXPECT_LE(v, 0.95);
    }
    EXPECT_GT(variance_of_laplacian(a, PaddingMode::Replicate), 0.0);
}
