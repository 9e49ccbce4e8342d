#include <cmath>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <gtest/gtest.h>

#include "covert/thresholds_rates.hpp"
#include "oracles.hpp"

using namespace covert;

namespace {

// Prior mass of the optimal window under the surrogate, evaluated from the
// test-side density with gamma* = max(phi1 + P/2, P).
double surrogate_xi(const oracle::LogN& base, double p) {
    const double gamma = std::max(base.phi1() + 0.5 * p, p);
    return 1.0 - oracle::window_mass(oracle::Surrogate{base}, p, gamma);
}

double bisect_oracle(const std::function<double(double)>& xi, double target, double hi) {
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (xi(mid) >= target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(ThresholdLogU, Examples) {
    const LogUniformModel m{1.0, 2.0};
    EXPECT_NEAR(p_threshold_logu(m, 0.5), 0.5, 1e-15);
    EXPECT_LT(p_threshold_logu(m, 1e-9), 1e-8);
    EXPECT_NEAR(p_threshold_logu(m, 1.0 - 1e-12), 1.5, 1e-10);
}

TEST(ThresholdLogU, SatisfiesRequirementExactly) {
    for (double rho_db : {0.5, 1.0, 2.0, 3.0, 5.0}) {
        const auto m = LogUniformModel::from_db(-30.0, rho_db);
        for (double eps : {0.05, 0.1, 0.3, 0.5, 0.9}) EXPECT_NEAR(xi_avg(m, p_threshold_logu(m, eps)).xi_avg, 1.0 - eps, 1e-9);
    }
}

TEST(ThresholdLogNApprox, WorkedValue) {
    const LogNormalModel m{0.0, 1.0};
    const oracle::LogN ref{0.0, 1.0};
    const double expect = 2.0 * std::sqrt(2.0 * ref.phi2()) * boost::math::erf_inv(ref.phi3() * 0.05);
    EXPECT_NEAR(p_threshold_logn_approx(m, 0.05), expect, 1e-14);
    EXPECT_NEAR(p_threshold_logn_approx(m, 0.05), 0.03005, 5e-6);
}

TEST(ThresholdLogNApprox, InvertsSurrogateAverage) {
    for (double sd : {0.5, 1.0, 2.0, 4.0}) {
        const LogNormalModel m{0.0, sd};
        const GaussianApproxModel g(m);
        for (double eps : {0.01, 0.1, 0.5, 0.9, 0.99}) {
            const double p = p_threshold_logn_approx(m, eps);
            EXPECT_NEAR(xi_avg(g, p).xi_avg, 1.0 - eps, 1e-8) << sd << " " << eps;
            EXPECT_NEAR(surrogate_xi(oracle::LogN{0.0, sd}, p), 1.0 - eps, 1e-8) << sd << " " << eps;
        }
    }
}

TEST(ThresholdLogNApprox, BranchContinuity) {
    for (double sd : {0.5, 1.0, 3.0, 6.0}) {
        const oracle::LogN ref{0.0, sd};
        const double scale = std::sqrt(2.0 * ref.phi2());
        const double erf_a = oracle::erf(ref.phi1() / scale);
        const double eps_b = erf_a / ref.phi3();
        if (!(eps_b < 1.0)) continue;
        const double first = 2.0 * scale * boost::math::erf_inv(ref.phi3() * eps_b);
        const double second = ref.phi1() - scale * boost::math::erf_inv(erf_a - 2.0 * ref.phi3() * eps_b);
        EXPECT_NEAR(first, second, 1e-9 * first) << sd;
        EXPECT_NEAR(first, 2.0 * ref.phi1(), 1e-9 * first) << sd;
        const LogNormalModel m{0.0, sd};
        const double below = p_threshold_logn_approx(m, eps_b * (1.0 - 1e-13));
        const double above = p_threshold_logn_approx(m, std::min(eps_b * (1.0 + 1e-13), 1.0 - 1e-16));
        EXPECT_NEAR(below, above, 1e-9 * first) << sd;
    }
}

TEST(ThresholdLogNApprox, Limits) {
    const LogNormalModel m{0.0, 1.0};
    EXPECT_LT(p_threshold_logn_approx(m, 1e-9), 1e-8);
    double prev = 0.0;
    for (double eps : {0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999}) {
        const double p = p_threshold_logn_approx(m, eps);
        EXPECT_GT(p, prev);
        EXPECT_TRUE(std::isfinite(p));
        prev = p;
    }
}

TEST(ThresholdOracle, MatchesClosedForms) {
    EXPECT_NEAR(p_threshold_oracle(LogUniformModel{1.0, 2.0}, 0.5), 0.5, 1e-8);
    const GaussianApproxModel g(LogNormalModel{0.0, 1.0});
    const double closed = p_threshold_closed(g, 0.5);
    EXPECT_NEAR(p_threshold_oracle(g, 0.5), closed, 1e-8 * closed);
}

TEST(ThresholdOracle, ExactLognormalNearApproximation) {
    const LogNormalModel m{-100.0, 0.5};
    const double approx = p_threshold_logn_approx(m, 0.2);
    const double exact = p_threshold_oracle(m, 0.2);
    EXPECT_LT(std::abs(approx - exact) / exact, 0.02);
    // Independent oracle: bisect the test-side window mass at a grid-optimal gamma.
    const oracle::LogN ref{-100.0, 0.5};
    auto xi = [&](double p) {
        const double lo = std::exp(ref.mu() - 8 * ref.s());
        const double hi = std::exp(ref.mu() + 8 * ref.s()) + p;
        return oracle::grid_minimize([&](double g) { return 1.0 - oracle::window_mass(ref, p, g); }, lo, hi, 300).min;
    };
    EXPECT_NEAR(exact, bisect_oracle(xi, 0.8, 1e-10), 1e-3 * exact);
}

TEST(ThresholdOracle, SmallEpsilonGapAsymptote) {
    // As eps -> 0 the surrogate threshold divided by the exact one tends to
    // phi3 e^{s^2} sqrt(e^{s^2} - 1) / s with s = k sigma_delta_db, the ratio of
    // the two density peaks.
    for (double sd : {0.5, 2.0}) {
        const LogNormalModel m{-100.0, sd};
        const double s = oracle::k * sd;
        const double phi3 = oracle::phi(1.0 / std::sqrt(std::expm1(s * s)));
        const double ratio = phi3 * std::exp(s * s) * std::sqrt(std::expm1(s * s)) / s;
        const double eps = 1e-4;
        EXPECT_NEAR(p_threshold_logn_approx(m, eps) / p_threshold_oracle(m, eps), ratio, 1e-3 * ratio) << sd;
    }
}

TEST(Thresholds, MonotoneInEpsilonAndUncertainty) {
    for (double rho_db : {0.5, 1.0, 2.0, 5.0}) {
        double prev = 0.0;
        for (double eps = 0.05; eps < 0.96; eps += 0.05) {
            const double p = p_threshold_logu(LogUniformModel::from_db(0.0, rho_db), eps);
            EXPECT_GT(p, prev);
            prev = p;
        }
    }
    for (double eps : {0.1, 0.3, 0.5, 0.9}) {
        double prev_u = 0.0;
        double prev_n = 0.0;
        for (double x = 0.25; x <= 6.0; x += 0.25) {
            const double pu = p_threshold_logu(LogUniformModel::from_db(0.0, x), eps);
            const double pn = p_threshold_logn_approx(LogNormalModel{0.0, x}, eps);
            // d/drho (rho^{2 eps - 1} - 1/rho) > 0 iff rho^{2 eps} < 1 / (1 - 2 eps).
            const double rho = std::pow(10.0, x / 10.0);
            if (eps >= 0.5 || std::pow(rho, 2.0 * eps) < 1.0 / (1.0 - 2.0 * eps)) EXPECT_GT(pu, prev_u) << eps << " " << x;
            EXPECT_GT(pn, prev_n);
            prev_u = pu;
            prev_n = pn;
        }
    }
}

TEST(Thresholds, LogUniformPeaksInRhoForSmallEpsilon) {
    // Below eps = 1/2 the bounded threshold is not monotone in rho: it peaks at
    // rho* = (1 - 2 eps)^{-1/(2 eps)}, about 4.85 dB for eps = 0.1.
    for (double eps : {0.1, 0.2, 0.3}) {
        const double rho_star = std::pow(1.0 - 2.0 * eps, -1.0 / (2.0 * eps));
        const double peak = p_threshold_logu(LogUniformModel{1.0, rho_star}, eps);
        EXPECT_LT(p_threshold_logu(LogUniformModel{1.0, rho_star * 1.01}, eps), peak) << eps;
        EXPECT_LT(p_threshold_logu(LogUniformModel{1.0, rho_star / 1.01}, eps), peak) << eps;
    }
    EXPECT_NEAR(10.0 * std::log10(std::pow(0.8, -5.0)), 4.8455, 1e-4);
}

TEST(Thresholds, WorstCaseBoundExceedsAverageThreshold) {
    for (double rho_db : {0.5, 1.0, 2.0, 3.0, 5.0}) {
        const auto m = LogUniformModel::from_db(0.0, rho_db);
        for (double eps : {0.01, 0.3, 0.9, 0.999}) EXPECT_GT(worst_case_power_bound(m), p_threshold_logu(m, eps));
        EXPECT_NEAR(worst_case_power_bound(m), (m.rho - 1.0 / m.rho), 1e-15);
    }
}

TEST(Thresholds, NoUncertaintyMeansNoPower) {
    EXPECT_EQ(p_threshold_closed(LogUniformModel::from_db(0.0, 0.0), 0.5), 0.0);
    EXPECT_EQ(p_threshold_closed(LogNormalModel{0.0, 0.0}, 0.5), 0.0);
    EXPECT_EQ(p_threshold_oracle(LogNormalModel{0.0, 0.0}, 0.5), 0.0);
}

TEST(Thresholds, EpsilonDomain) {
    for (double eps : {0.0, 1.0, -0.1, 1.2}) {
        EXPECT_THROW(p_threshold_logu(LogUniformModel{1.0, 2.0}, eps), DomainError);
        EXPECT_THROW(p_threshold_logn_approx(LogNormalModel{0.0, 1.0}, eps), DomainError);
        EXPECT_THROW(p_threshold_oracle(LogUniformModel{1.0, 2.0}, eps), DomainError);
    }
}

TEST(Requirement, BindingEpsilon) {
    CovertnessRequirement r{0.2, 0.05};
    EXPECT_NO_THROW(r.validate());
    EXPECT_EQ(r.binding_epsilon(), 0.05);
    EXPECT_EQ((CovertnessRequirement{0.2, std::nullopt}).binding_epsilon(), 0.2);
    EXPECT_THROW((CovertnessRequirement{0.2, 1.5}).validate(), DomainError);
}

TEST(Rate, Examples) {
    const LinkGeometry unit{1.0, 1.0, 2.0, 1.0};
    EXPECT_EQ(covert_rate(0.0, unit), 0.0);
    EXPECT_NEAR(covert_rate(0.5, unit), 0.5 * std::log2(1.5), 1e-15);
    EXPECT_NEAR(covert_rate(0.5, unit), 0.29248, 1e-5);
    const LinkGeometry doubled{1.0, std::sqrt(2.0), 2.0, 1.0};
    EXPECT_NEAR(covert_rate(0.5, doubled), 0.5, 1e-15);
    EXPECT_NEAR(covert_rate(p_threshold_logu(LogUniformModel{1.0, 2.0}, 0.5), unit), 0.29248, 1e-5);
}

TEST(Rate, GeometryValidation) {
    EXPECT_THROW(covert_rate(0.5, LinkGeometry{0.0, 1.0, 2.0, 1.0}), DomainError);
    EXPECT_THROW(covert_rate(0.5, LinkGeometry{1.0, -1.0, 2.0, 1.0}), DomainError);
    EXPECT_THROW(covert_rate(0.5, LinkGeometry{1.0, 1.0, 0.0, 1.0}), DomainError);
    EXPECT_THROW(covert_rate(0.5, LinkGeometry{1.0, 1.0, 2.0, 0.0}), DomainError);
    EXPECT_THROW(covert_rate(-0.5, LinkGeometry{}), DomainError);
}

TEST(Rate, MonotoneInUncertaintyAndEpsilon) {
    const LinkGeometry g{1.0, 1.0, 2.0, 1e-10};
    for (double eps : {0.1, 0.3, 0.5}) {
        double prev = 0.0;
        for (double sd = 0.2; sd <= 5.0; sd += 0.2) {
            const double r = covert_rate(p_threshold_logn_approx(LogNormalModel{-100.0, sd}, eps), g);
            EXPECT_GT(r, prev);
            prev = r;
        }
    }
}
