#include <cmath>

#include <gtest/gtest.h>

#include "covert/montecarlo.hpp"
#include "covert/thresholds_rates.hpp"
#include "oracles.hpp"

using namespace covert;

namespace {

const NoiseModel kLogU = LogUniformModel{1.0, 2.0};

MonteCarloConfig config(std::uint64_t seed, std::uint64_t trials) {
    MonteCarloConfig c;
    c.seed = seed;
    c.trials = trials;
    return c;
}

}  // namespace

TEST(Proportion, HalfWidth) {
    const auto e = proportion(500, 1000, 3.0);
    EXPECT_EQ(e.estimate, 0.5);
    EXPECT_NEAR(e.half_width, 3.0 * std::sqrt(0.25 / 1000.0), 1e-15);
    const auto zero = proportion(0, 1000, 3.0);
    EXPECT_EQ(zero.estimate, 0.0);
    EXPECT_GT(zero.half_width, 0.0);
    const auto all = proportion(1000, 1000, 3.0);
    EXPECT_EQ(all.estimate, 1.0);
    EXPECT_NEAR(all.half_width, zero.half_width, 1e-15);
}

TEST(EstimateXiAvg, WorkedExample) {
    const auto e = estimate_xi_avg(kLogU, 0.5, 1.0, config(1, 100000));
    EXPECT_NEAR(e.half_width, 3.0 * std::sqrt(0.25 / 1e5), 2e-5);
    EXPECT_TRUE(e.covers(0.5)) << e.estimate << " +- " << e.half_width;
}

TEST(EstimateXiAvg, ZeroPowerAndDeterminism) {
    const auto z = estimate_xi_avg(kLogU, 0.0, std::nullopt, config(3, 1000));
    EXPECT_EQ(z.estimate, 1.0);
    EXPECT_EQ(z.half_width, 0.0);
    const auto a = estimate_xi_avg(LogNormalModel{0.0, 1.0}, 0.2, std::nullopt, config(5, 20000));
    const auto b = estimate_xi_avg(LogNormalModel{0.0, 1.0}, 0.2, std::nullopt, config(5, 20000));
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.half_width, b.half_width);
}

TEST(EstimateXiAvg, WorkersDoNotChangeResult) {
    auto c1 = config(8, 200000);
    auto c4 = c1;
    c4.workers = 4;
    EXPECT_EQ(estimate_xi_avg(kLogU, 0.7, std::nullopt, c1).estimate, estimate_xi_avg(kLogU, 0.7, std::nullopt, c4).estimate);
}

TEST(EstimatePOut, Examples) {
    const auto cfg = config(17, 100000);
    const auto xi = estimate_xi_avg(kLogU, 0.5, std::nullopt, cfg);
    const auto po = estimate_p_out(kLogU, 0.5, 0.1, cfg);
    EXPECT_EQ(po.estimate + xi.estimate, 1.0);
    EXPECT_EQ(estimate_p_out(kLogU, 0.0, 0.1, cfg).estimate, 0.0);
    EXPECT_EQ(estimate_p_out(kLogU, 1.5, 0.1, cfg).estimate, 1.0);
    EXPECT_THROW(estimate_p_out(kLogU, 0.5, 1.0, cfg), DomainError);
}

TEST(EstimatePOut, SharedSeedComplementAcrossModels) {
    const auto cfg = config(99, 30000);
    for (const NoiseModel& m : {kLogU, NoiseModel{LogNormalModel{0.0, 1.0}}, NoiseModel{GaussianApproxModel(LogNormalModel{0.0, 2.0})}}) {
        for (double p : {0.05, 0.3, 1.0}) {
            const double sum = estimate_p_out(m, p, 0.3, cfg).estimate + estimate_xi_avg(m, p, std::nullopt, cfg).estimate;
            EXPECT_EQ(sum, 1.0) << model_kind(m) << " " << p;
        }
    }
}

TEST(EstimateXiAvg, ConsistentWithAnalyticOverGrid) {
    // Same grid shape as the metric tests; one outlier per hundred comparisons is allowed.
    int comparisons = 0;
    int outliers = 0;
    std::uint64_t seed = 1000;
    for (double rho_db : {0.5, 1.0, 3.0, 5.0}) {
        const auto m = LogUniformModel::from_db(0.0, rho_db);
        for (double f : {0.05, 0.3, 0.7, 0.99, 1.3}) {
            const double p = f * (m.rho - 1.0 / m.rho);
            const auto e = estimate_xi_avg(m, p, std::nullopt, config(++seed, 50000));
            ++comparisons;
            outliers += e.covers(xi_avg(m, p).xi_avg) ? 0 : 1;
        }
    }
    for (double sd : {0.5, 1.0, 2.0}) {
        for (const NoiseModel& m : {NoiseModel{LogNormalModel{0.0, sd}}, NoiseModel{GaussianApproxModel(LogNormalModel{0.0, sd})}}) {
            for (double f : {0.05, 0.5, 1.5, 4.0}) {
                const double p = f * uncertainty_scale(m);
                const auto e = estimate_xi_avg(m, p, std::nullopt, config(++seed, 50000));
                ++comparisons;
                outliers += e.covers(xi_avg(m, p).xi_avg) ? 0 : 1;
            }
        }
    }
    EXPECT_LE(outliers, std::max(1, comparisons / 100)) << outliers << " of " << comparisons;
}

TEST(McThreshold, BoundedWorkedExample) {
    const double t = mc_threshold(kLogU, 0.5, config(1, 1000000));
    EXPECT_NEAR(t, 0.5, 0.003);
    const double hw = mc_threshold_half_width(kLogU, 0.5, t, config(1, 1000000));
    EXPECT_GT(hw, 0.0);
    EXPECT_LT(hw, 0.003);
}

TEST(McThreshold, DeterministicAndMonotone) {
    const auto cfg = config(4, 50000);
    EXPECT_EQ(mc_threshold(kLogU, 0.3, cfg), mc_threshold(kLogU, 0.3, cfg));
    double prev = INFINITY;
    for (double eps : {0.5, 0.2, 0.1, 0.05, 0.01}) {
        const double t = mc_threshold(kLogU, eps, cfg);
        EXPECT_GT(t, 0.0);
        EXPECT_LT(t, prev);
        prev = t;
    }
}

TEST(McThreshold, ExactLognormalWithinStatisticalError) {
    const LogNormalModel m{-100.0, 0.5};
    const auto cfg = config(21, 100000);
    for (double eps : {0.1, 0.5, 0.9}) {
        const double t = mc_threshold(m, eps, cfg);
        const double hw = mc_threshold_half_width(m, eps, t, cfg);
        EXPECT_NEAR(t, p_threshold_oracle(m, eps), hw) << eps;
    }
}

TEST(SimulateDetector, ThresholdExtremes) {
    const auto cfg = config(2, 2000);
    const auto zero = simulate_detector(1.0, 1.0, 10, 0.0, cfg);
    EXPECT_EQ(zero.p_fa.estimate, 1.0);
    EXPECT_EQ(zero.p_md.estimate, 0.0);
    const auto huge = simulate_detector(1.0, 1.0, 10, 1e6, cfg);
    EXPECT_EQ(huge.p_fa.estimate, 0.0);
    EXPECT_EQ(huge.p_md.estimate, 1.0);
}

TEST(SimulateDetector, MatchesExactChiSquareLaw) {
    // The simulator is checked against the exact law of the statistic rather
    // than the CLT approximation, which is biased in the tails at small N.
    for (unsigned n : {10u, 100u}) {
        for (double gamma : {1.2, 1.5, 1.8}) {
            const auto e = simulate_detector(1.0, 1.0, n, gamma, config(31 + n, 100000));
            EXPECT_TRUE(e.p_fa.covers(oracle::chi2_p_fa(1.0, gamma, n))) << n << " " << gamma;
            EXPECT_TRUE(e.p_md.covers(oracle::chi2_p_md(1.0, 1.0, gamma, n))) << n << " " << gamma;
        }
    }
}

TEST(SimulateDetector, HalfWidthShrinksWithTrials) {
    const auto a = simulate_detector(1.0, 1.0, 20, 1.4, config(6, 10000));
    const auto b = simulate_detector(1.0, 1.0, 20, 1.4, config(6, 40000));
    EXPECT_NEAR(b.p_md.half_width / a.p_md.half_width, 0.5, 0.05);
}

TEST(SimulateDetector, WorkersDoNotChangeResult) {
    auto c1 = config(12, 20000);
    auto c3 = c1;
    c3.workers = 3;
    const auto a = simulate_detector(1.0, 0.5, 50, 1.2, c1);
    const auto b = simulate_detector(1.0, 0.5, 50, 1.2, c3);
    EXPECT_EQ(a.p_fa.estimate, b.p_fa.estimate);
    EXPECT_EQ(a.p_md.estimate, b.p_md.estimate);
}

TEST(MonteCarloConfigValue, Validation) {
    EXPECT_THROW(config(1, 99).validate(), DomainError);
    auto c = config(1, 100);
    c.confidence_z = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    EXPECT_THROW(simulate_detector(1.0, 1.0, 0, 1.0, config(1, 100)), DomainError);
}
