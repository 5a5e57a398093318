#include <gtest/gtest.h>

#include "dnsp/gradcheck.hpp"

using namespace dnsp;

TEST(Gradcheck, RelativeErrorIsNormwise) {
    EXPECT_EQ(gradcheck::relative_error({0, 0}, {0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(gradcheck::relative_error({3, 4}, {3, 4}), 0.0);
    EXPECT_DOUBLE_EQ(gradcheck::relative_error({1, 0}, {0, 0}), 1.0);
    EXPECT_NEAR(gradcheck::relative_error({2, 0}, {1, 0}), 0.5, 1e-15);
}

TEST(Gradcheck, CentralDifferencesOfQuadratic) {
    const auto g = gradcheck::central_differences({1.0, -2.0}, [](const std::vector<double>& x) {
        return x[0] * x[0] + 3 * x[0] * x[1];
    });
    EXPECT_NEAR(g[0], 2.0 - 6.0, 1e-8);
    EXPECT_NEAR(g[1], 3.0, 1e-8);
}

TEST(Gradcheck, WhichParsing) {
    EXPECT_EQ(gradcheck::which_from_string("rank"), gradcheck::Which::Rank);
    EXPECT_EQ(gradcheck::which_from_string("sharpness"), gradcheck::Which::Sharpness);
    EXPECT_EQ(gradcheck::which_from_string("vmod"), gradcheck::Which::VMod);
    EXPECT_EQ(gradcheck::which_from_string("smeasure"), gradcheck::Which::SMeasure);
    EXPECT_EQ(gradcheck::which_from_string("network"), gradcheck::Which::Network);
    EXPECT_EQ(gradcheck::which_from_string("all"), gradcheck::Which::All);
    EXPECT_THROW(gradcheck::which_from_string("bias"), ArgumentError);
}

TEST(Gradcheck, FullSuitePassesOnSeveralSeeds) {
    for (std::uint64_t seed : {1u, 7u, 123u}) {
        const auto reports = gradcheck::run(gradcheck::Which::All, seed);
        EXPECT_EQ(reports.size(), 6u);
        for (const auto& r : reports) {
            EXPECT_TRUE(r.passed()) << r.name << " seed " << seed << " err " << r.max_rel_error;
            EXPECT_GT(r.draws, r.skipped);
        }
    }
}

TEST(Gradcheck, TolerancesAreTheDocumentedOnes) {
    for (const auto& r : gradcheck::run(gradcheck::Which::All, 5)) {
        const double expected = r.name == "rank_surrogate_grad" ? 1e-4 : r.name == "network_loss_grad" ? 1e-6 : 1e-8;
        EXPECT_EQ(r.tolerance, expected) << r.name;
        if (r.name != "network_loss_grad") {
            EXPECT_GE(r.draws - r.skipped, 50u) << r.name;
        }
    }
}

TEST(Gradcheck, CustomSizeStillPasses) {
    for (const auto& r : gradcheck::run(gradcheck::Which::Sharpness, 3, 14)) EXPECT_TRUE(r.passed()) << r.name;
}
