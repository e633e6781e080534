#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "starhomog/stargraph.hpp"

using namespace starhomog;

TEST(VertexAngles, FirstAngleIsOneRadian) {
    const auto a = vertex_angles(1);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_DOUBLE_EQ(a[0], 1.0);
}

TEST(VertexAngles, WrapsModuloTwoPi) {
    const auto a = vertex_angles(7);
    EXPECT_NEAR(a[6], 7.0 - 2.0 * std::numbers::pi, 1e-15);
    EXPECT_NEAR(a[6], 0.71681, 1e-5);
    for (double x : a) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, two_pi);
    }
}

TEST(VertexAngles, RejectsZero) { EXPECT_THROW(vertex_angles(0), std::invalid_argument); }

TEST(VertexAngles, HalfOfAnglesInUpperHalfCircle) {
    const auto a = vertex_angles(100000);
    std::size_t count = 0;
    for (double x : a) count += x <= std::numbers::pi;
    EXPECT_NEAR(static_cast<double>(count) / 1e5, 0.5, 0.01);
}

TEST(CoefficientDeterministic, ModThreeRule) {
    EXPECT_EQ(coefficient_deterministic(3), 1.0);
    EXPECT_EQ(coefficient_deterministic(4), 2.0);
    int ones = 0;
    for (std::size_t l = 1; l <= 1000; ++l) ones += coefficient_deterministic(l) == 1.0;
    EXPECT_EQ(ones, 333);
}

TEST(CoefficientRandom, EmpiricalFractionNearLaw) {
    const auto k = coefficient_random(1000, 12345, {1.0 / 3.0, 2.0 / 3.0});
    std::size_t ones = 0;
    for (double v : k) ones += v == 1.0;
    EXPECT_NEAR(static_cast<double>(ones) / 1000.0, 1.0 / 3.0, 0.05);
}

TEST(CoefficientRandom, DegenerateLaw) {
    for (double v : coefficient_random(500, 7, {1.0, 0.0})) EXPECT_EQ(v, 1.0);
    for (double v : coefficient_random(500, 7, {0.0, 1.0})) EXPECT_EQ(v, 2.0);
}

TEST(CoefficientRandom, SameSeedSameSequence) {
    EXPECT_EQ(coefficient_random(1000, 99, {0.5, 0.5}), coefficient_random(1000, 99, {0.5, 0.5}));
    EXPECT_NE(coefficient_random(1000, 99, {0.5, 0.5}), coefficient_random(1000, 100, {0.5, 0.5}));
}

TEST(CoefficientRandom, PrefixStableAcrossLengths) {
    const auto shorter = coefficient_random(100, 5, {1.0 / 3.0, 2.0 / 3.0});
    const auto longer = coefficient_random(1000, 5, {1.0 / 3.0, 2.0 / 3.0});
    EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), longer.begin()));
}

TEST(CoefficientRandom, RejectsBadProbabilities) {
    EXPECT_THROW(coefficient_random(10, 1, {0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(coefficient_random(10, 1, {0.5, 0.5 + 1e-9}), std::invalid_argument);
    EXPECT_THROW(coefficient_random(10, 1, {}), std::invalid_argument);
    EXPECT_NO_THROW(coefficient_random(10, 1, {0.5, 0.5 + 1e-13}));
}

TEST(BuildStage, SixEdgesDeterministic) {
    const auto stage = build_stage(6, CoefficientRule::deterministic());
    const auto stats = group_stats(stage);
    EXPECT_EQ(stats.counts, (std::vector<std::size_t>{2, 4}));
    EXPECT_DOUBLE_EQ(stats.fractions[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(stats.fractions[1], 2.0 / 3.0);
    EXPECT_EQ(stage.edges_in_group(0), (std::vector<std::size_t>{2, 5}));
}

TEST(BuildStage, ThousandEdgesDeterministic) {
    const auto stats = group_stats(build_stage(1000, CoefficientRule::deterministic()));
    EXPECT_NEAR(stats.kbar, 1.667, 1e-12);
    EXPECT_NEAR(stats.fractions[0], 1.0 / 3.0, 1e-3);
    EXPECT_NEAR(stats.fractions[1], 2.0 / 3.0, 1e-3);
}

TEST(BuildStage, RejectsDegreeOneCenter) {
    EXPECT_THROW(build_stage(1, CoefficientRule::deterministic()), std::invalid_argument);
    EXPECT_THROW(build_stage(0, CoefficientRule::deterministic()), std::invalid_argument);
}

TEST(StarStage, RejectsInconsistentInput) {
    EXPECT_THROW(StarStage({0.0, 1.0}, {0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(StarStage({0.0}, {1}, {1.0}), std::invalid_argument);
    EXPECT_THROW(StarStage({0.0}, {0}, {0.0}), std::invalid_argument);
}

TEST(StageProperties, InvariantsHoldForRandomStages) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + gen() % 3000;
        const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
        const auto rule = trial % 2 ? CoefficientRule::deterministic()
                                    : CoefficientRule::random(gen(), {p, 1.0 - p});
        const auto stage = build_stage(n, rule);
        const auto stats = group_stats(stage);
        std::size_t total = 0;
        double frac = 0.0, kbar = 0.0;
        for (std::size_t i = 0; i < stats.counts.size(); ++i) {
            total += stats.counts[i];
            frac += stats.fractions[i];
            kbar += stats.fractions[i] * stage.group_values()[i];
        }
        EXPECT_EQ(total, n);
        EXPECT_NEAR(frac, 1.0, 1e-12);
        EXPECT_NEAR(stats.kbar, kbar, 1e-12);
        EXPECT_GE(stats.kbar, stage.c_K());
        for (std::size_t e = 0; e < n; ++e) {
            EXPECT_EQ(stage.coeffs()[e], stage.group_values()[stage.group_of()[e]]);
            EXPECT_GE(stage.coeffs()[e], stage.c_K());
        }
    }
}

TEST(StageProperties, DeterministicFractionWithinOneOverN) {
    for (std::size_t n = 2; n <= 2000; ++n) {
        const auto stats = group_stats(build_stage(n, CoefficientRule::deterministic()));
        EXPECT_LE(std::abs(stats.fractions[0] - 1.0 / 3.0), 1.0 / static_cast<double>(n)) << n;
    }
}

TEST(StageProperties, RandomFractionConcentrates) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto stats = group_stats(
            build_stage(1000, CoefficientRule::random(seed, {1.0 / 3.0, 2.0 / 3.0})));
        good += std::abs(stats.fractions[0] - 1.0 / 3.0) <= 0.05;
    }
    EXPECT_GE(good, 95);
}
