#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace dnsp;
using dnsp::testing::uniform_image;

namespace {

// Windowed SSIM evaluated window by window with an explicit 2-D Gaussian.
double brute_ssim(const Image& a, const Image& b) {
    const int win = 11;
    double wsum = 0.0;
    std::vector<double> w(win * win);
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double di = i - 5, dj = j - 5;
            w[i * win + j] = std::exp(-(di * di + dj * dj) / (2 * 1.5 * 1.5));
            wsum += w[i * win + j];
        }
    for (double& v : w) v /= wsum;
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    int count = 0;
    for (std::size_t r = 0; r + win <= a.height(); ++r)
        for (std::size_t c = 0; c + win <= a.width(); ++c) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double x = a(r + i, c + j), y = b(r + i, c + j), k = w[i * win + j];
                    ma += k * x, mb += k * y, saa += k * x * x, sbb += k * y * y, sab += k * x * y;
                }
            const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / count;
}

Image rank_fixture(std::size_t n, std::size_t rank, double noise_norm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd u(n, rank), z(n, rank);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = g(rng), z.data()[i] = g(rng);
    Eigen::MatrixXd m = u * z.transpose() / static_cast<double>(n);
    Eigen::MatrixXd e(n, n);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = g(rng);
    m += noise_norm * e / e.norm();
    return from_matrix(m);
}

} // namespace

TEST(Psnr, IdenticalImagesAreInfinite) {
    const Image a = uniform_image(8, 8, 1);
    EXPECT_TRUE(std::isinf(psnr(a, a)));
    EXPECT_GT(psnr(a, a), 0.0);
}

TEST(Psnr, ConstantOffsets) {
    EXPECT_NEAR(psnr(Image(10, 10, 0.0), Image(10, 10, 0.1)), 20.0, 1e-12);
    EXPECT_EQ(psnr(Image(10, 10, 0.0), Image(10, 10, 1.0)), 0.0);
}

TEST(Psnr, SymmetricAndShapeChecked) {
    const Image a = uniform_image(9, 7, 2), b = uniform_image(9, 7, 3);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_THROW(psnr(a, Image(7, 9)), DimensionError);
}

TEST(Ssim, IdentityIsExactlyOne) {
    const Image a = make_textured_image(32, 32, 1);
    EXPECT_EQ(ssim(a, a), 1.0);
    EXPECT_EQ(ssim(Image(11, 11, 0.3), Image(11, 11, 0.3)), 1.0);
}

TEST(Ssim, MatchesWindowedOracle) {
    std::mt19937_64 rng(4);
    for (int draw = 0; draw < 5; ++draw) {
        const Image a = uniform_image(14, 13, rng), b = uniform_image(14, 13, rng);
        EXPECT_NEAR(ssim(a, b), brute_ssim(a, b), 1e-12);
    }
    const Image t = make_textured_image(24, 20, 5);
    const Image u = clamp01(gaussian_blur(t, 1.0));
    EXPECT_NEAR(ssim(t, u), brute_ssim(t, u), 1e-12);
}

TEST(Ssim, BoundsOverRandomPairs) {
    std::mt19937_64 rng(6);
    for (int draw = 0; draw < 100; ++draw) {
        const Image a = uniform_image(16, 16, rng);
        Image b = uniform_image(16, 16, rng);
        if (draw % 3 == 0)
            for (std::size_t i = 0; i < b.size(); ++i) b.values()[i] = 1.0 - a.values()[i];
        const double s = ssim(a, b);
        EXPECT_GE(s, -1.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Ssim, InvertedImageScoresBelowOne) {
    const Image a = make_textured_image(30, 30, 7);
    Image inv = a;
    for (double& v : inv.values()) v = 1.0 - v;
    EXPECT_LT(ssim(a, inv), 1.0);
}

TEST(Ssim, SmallOffsetBeatsShuffle) {
    const Image a = make_textured_image(40, 40, 8);
    Image offset = a;
    for (double& v : offset.values()) v = std::min(1.0, v + 0.05);
    Image shuffled = a;
    std::mt19937_64 rng(9);
    std::shuffle(shuffled.values().begin(), shuffled.values().end(), rng);
    EXPECT_GT(ssim(a, offset), ssim(a, shuffled));
}

TEST(Ssim, Errors) {
    EXPECT_THROW(ssim(Image(10, 20), Image(10, 20)), ArgumentError);
    EXPECT_THROW(ssim(Image(12, 12), Image(12, 13)), DimensionError);
}

TEST(Evaluate, ReportsBothMetrics) {
    const Image a = make_textured_image(20, 20, 1), b = clamp01(gaussian_blur(a, 0.8));
    const MetricReport m = evaluate(b, a);
    EXPECT_EQ(m.psnr_db, psnr(b, a));
    EXPECT_EQ(m.ssim, ssim(b, a));
}

TEST(RankStudy, SortedMonotoneAndFullRankInfinite) {
    const Image img = make_textured_image(40, 48, 3);
    const auto rows = rank_study(img, {40, 5, 1, 20, 10, 0});
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LT(rows[i - 1].parameter, rows[i].parameter);
        EXPECT_GE(rows[i].value, rows[i - 1].value);
    }
    EXPECT_TRUE(std::isinf(rows.back().value));
    EXPECT_THROW(rank_study(img, {41}), ArgumentError);
}

TEST(RankStudy, MatchesReconstructionPsnr) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto images = {make_textured_image(24, 30, seed), uniform_image(20, 26, seed)};
        for (const Image& img : images) {
            const std::size_t full = std::min(img.height(), img.width());
            std::vector<std::size_t> ranks(full + 1);
            std::iota(ranks.begin(), ranks.end(), std::size_t{0});
            const auto rows = rank_study(img, ranks);
            for (std::size_t r = 0; r < full; ++r) EXPECT_NEAR(rows[r].value, psnr(truncate_svd(img, r), img), 1e-6);
            EXPECT_TRUE(std::isinf(rows[full].value));
        }
    }
}

TEST(RankStudy, MonotoneOnEveryFixture) {
    std::vector<std::size_t> ranks(33);
    std::iota(ranks.begin(), ranks.end(), std::size_t{0});
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto images = {make_textured_image(32, 32, seed), uniform_image(32, 36, seed)};
        for (const Image& img : images) {
            const auto rows = rank_study(img, ranks);
            for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].value, rows[i - 1].value);
        }
    }
}

TEST(RankStudy, ExactRankFixtureJumps) {
    const Image img = rank_fixture(64, 20, 1e-6, 11);
    const auto rows = rank_study(img, {10, 20});
    EXPECT_GT(rows[1].value - rows[0].value, 20.0);
}

TEST(SharpnessStudy, ConstantImageGivesZeros) {
    for (const auto& r : sharpness_study(Image(20, 20, 0.4), {0.5, 1.0, 2.0})) EXPECT_EQ(r.value, 0.0);
}

TEST(SharpnessStudy, StrictlyDecreasingOnFixtures) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto rows = sharpness_study(make_textured_image(48, 48, seed), {2.0, 0.5, 1.5, 1.0});
        ASSERT_EQ(rows.size(), 4u);
        EXPECT_EQ(rows[0].parameter, 0.5);
        for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].value, rows[i - 1].value);
    }
}

TEST(SharpnessStudy, QuadraticScaling) {
    const Image img = make_textured_image(30, 30, 2);
    Image scaled = img;
    for (double& v : scaled.values()) v *= 3.0;
    const auto a = sharpness_study(img, {0.5, 1.5});
    const auto b = sharpness_study(scaled, {0.5, 1.5});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i].value, 9.0 * a[i].value, 1e-12 * b[i].value);
    EXPECT_THROW(sharpness_study(img, {0.0}), ArgumentError);
}
