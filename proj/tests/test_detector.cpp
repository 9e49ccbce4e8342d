#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "covert/detector.hpp"
#include "covert/rng.hpp"
#include "oracles.hpp"

using namespace covert;

TEST(TestStatistic, Basics) {
    const std::vector<double> pm{1.0, -1.0, 1.0, -1.0};
    EXPECT_EQ(test_statistic(pm), 1.0);
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    EXPECT_EQ(test_statistic(zeros), 0.0);
    EXPECT_THROW(test_statistic(std::vector<double>{}), DomainError);
}

TEST(TestStatistic, LargeSampleMean) {
    RandomStream rng(5);
    std::vector<double> ys(100000);
    for (double& y : ys) y = std::sqrt(2.0) * rng.normal();
    EXPECT_NEAR(test_statistic(ys), 2.0, 0.05);
}

TEST(FiniteN, WorkedExample) {
    const auto e = finite_n_errors(1.0, 1.5, {1.0, 100});
    EXPECT_NEAR(e.p_fa, oracle::q(0.5 / std::sqrt(0.02)), 1e-15);
    EXPECT_NEAR(e.p_fa, 2.0347600872e-4, 1e-13);
    EXPECT_NEAR(e.p_md, 1.0 - oracle::q(-0.5 / (2.0 * std::sqrt(0.02))), 1e-15);
    EXPECT_NEAR(e.p_md, 0.0385499358717708, 1e-13);
    EXPECT_EQ(e.xi, e.p_fa + e.p_md);
}

TEST(FiniteN, ThresholdAtMeans) {
    EXPECT_EQ(finite_n_errors(2.0, 2.0, {1.0, 50}).p_fa, 0.5);
    EXPECT_EQ(finite_n_errors(2.0, 3.0, {1.0, 50}).p_md, 0.5);
}

TEST(FiniteN, MonotoneInGamma) {
    double prev_fa = 1.0;
    double prev_md = 0.0;
    for (double g = 0.0; g <= 4.0; g += 0.01) {
        const auto e = finite_n_errors(1.0, g, {1.0, 200});
        EXPECT_LE(e.p_fa, prev_fa);
        EXPECT_GE(e.p_md, prev_md);
        prev_fa = e.p_fa;
        prev_md = e.p_md;
    }
}

TEST(FiniteN, ConvergesToIndicator) {
    EXPECT_LT(finite_n_errors(1.0, 1.5, {1.0, 1000000}).xi, 1e-3);
    EXPECT_NEAR(finite_n_errors(1.0, 2.5, {1.0, 1000000}).xi, 1.0, 1e-3);
    EXPECT_NEAR(finite_n_errors(1.0, 0.7, {1.0, 1000000}).xi, 1.0, 1e-3);
    double prev = 2.0;
    for (std::uint64_t n : {10u, 100u, 1000u, 10000u, 100000u}) {
        const double xi = finite_n_errors(1.0, 1.5, {1.0, n}).xi;
        EXPECT_LT(xi, prev);
        prev = xi;
    }
}

TEST(FiniteN, RejectsBadInput) {
    EXPECT_THROW(finite_n_errors(1.0, 1.0, {1.0, std::nullopt}), DomainError);
    EXPECT_THROW(finite_n_errors(0.0, 1.0, {1.0, 10}), DomainError);
    EXPECT_THROW(finite_n_errors(1.0, 1.0, {-1.0, 10}), DomainError);
    EXPECT_THROW(finite_n_errors(1.0, 1.0, {1.0, 0}), DomainError);
}

TEST(AsymptoticXi, ClosedInterval) {
    EXPECT_EQ(asymptotic_xi(1.0, 1.2, 0.5), 0.0);
    EXPECT_EQ(asymptotic_xi(1.0, 2.0, 0.5), 1.0);
    EXPECT_EQ(asymptotic_xi(1.0, 1.0, 0.0), 0.0);
    EXPECT_EQ(asymptotic_xi(1.0, 1.5, 0.5), 0.0);
    EXPECT_EQ(asymptotic_xi(1.0, 0.999, 0.5), 1.0);
    EXPECT_THROW(asymptotic_xi(0.0, 1.0, 0.5), DomainError);
}
