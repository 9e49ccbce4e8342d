#pragma once

// Seeded Monte Carlo counterparts of the analytic metrics.
//
// Every estimator draws through substreams keyed by (seed, block index), so a
// run is a pure function of its inputs and of nothing else: the worker count
// changes wall time, never the numbers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "covert/covertness_metrics.hpp"
#include "covert/detector.hpp"
#include "covert/error.hpp"
#include "covert/noise_models.hpp"
#include "covert/rng.hpp"
#include "covert/units_special.hpp"

namespace covert {

struct MonteCarloConfig {
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;
    double confidence_z = 3.0;  ///< half-width multiplier for reported intervals
    unsigned workers = 1;

    void validate() const {
        if (trials < 100) throw DomainError("MonteCarloConfig: trials must be >= 100");
        if (!(confidence_z > 0.0)) throw DomainError("MonteCarloConfig: confidence_z must be positive");
    }
};

struct EstimateWithCI {
    double estimate = 0.0;
    double half_width = 0.0;
    std::uint64_t trials = 0;

    bool covers(double value) const { return std::abs(value - estimate) <= half_width; }
};

/// Binomial proportion with a normal-approximation half-width. Fewer than ten
/// successes or failures switch the variance to the Wilson-adjusted
/// proportion, so a count of 0 or n still reports a nonzero width.
inline EstimateWithCI proportion(std::uint64_t successes, std::uint64_t trials, double z) {
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    double p_var = p;
    if (std::min(successes, trials - successes) < 10) p_var = (static_cast<double>(successes) + 0.5 * z * z) / (n + z * z);
    return {p, z * std::sqrt(p_var * (1.0 - p_var) / n), trials};
}

/// Sorted draw set shared across evaluations (common random numbers).
class CommonDraws {
  public:
    CommonDraws(const NoiseModel& model, const MonteCarloConfig& cfg)
        : draws_(sample(model, cfg.seed, cfg.trials, cfg.workers)) {
        std::sort(draws_.begin(), draws_.end());
    }

    std::size_t size() const { return draws_.size(); }

    /// Draws s with xi(s, gamma) = 0, i.e. s <= gamma <= p_w + s.
    std::uint64_t hits(double p_w, double gamma) const {
        auto first = std::partition_point(draws_.begin(), draws_.end(), [&](double s) { return !(gamma <= p_w + s); });
        auto last = std::partition_point(first, draws_.end(), [&](double s) { return s <= gamma; });
        return static_cast<std::uint64_t>(last - first);
    }

  private:
    std::vector<double> draws_;
};

namespace detail {

inline std::uint64_t count_hits(const NoiseModel& model, double p_w, double gamma, const MonteCarloConfig& cfg) {
    const auto draws = sample(model, cfg.seed, cfg.trials, cfg.workers);
    std::uint64_t hits = 0;
    for (double s : draws) hits += asymptotic_xi(s, gamma, p_w) == 0.0 ? 1 : 0;
    return hits;
}

}  // namespace detail

/// Empirical average error sum: draw sigma_w^2 from the prior, average the 0/1
/// indicator at `gamma` (Willie's optimal threshold when empty).
inline EstimateWithCI estimate_xi_avg(const NoiseModel& model, double p_w, std::optional<double> gamma,
                                      const MonteCarloConfig& cfg) {
    cfg.validate();
    detail::check_power(p_w);
    if (p_w == 0.0) return {1.0, 0.0, cfg.trials};
    const double g = gamma ? *gamma : optimal_gamma(model, p_w);
    const auto hits = detail::count_hits(model, p_w, g, cfg);
    auto est = proportion(cfg.trials - hits, cfg.trials, cfg.confidence_z);
    est.estimate = 1.0 - static_cast<double>(hits) / static_cast<double>(cfg.trials);
    return est;
}

/// Empirical covert outage: share of draws with xi < 1 - epsilon at Willie's
/// optimal threshold. Under a shared seed this is exactly 1 - estimate_xi_avg.
inline EstimateWithCI estimate_p_out(const NoiseModel& model, double p_w, double epsilon, const MonteCarloConfig& cfg) {
    cfg.validate();
    detail::check_epsilon(epsilon);
    detail::check_power(p_w);
    if (p_w == 0.0) return {0.0, 0.0, cfg.trials};
    const double g = optimal_gamma(model, p_w);
    const auto draws = sample(model, cfg.seed, cfg.trials, cfg.workers);
    std::uint64_t outages = 0;
    for (double s : draws) outages += asymptotic_xi(s, g, p_w) < 1.0 - epsilon ? 1 : 0;
    return proportion(outages, cfg.trials, cfg.confidence_z);
}

/// Largest P_w whose empirical xi_avg still meets 1 - epsilon, found by
/// bisection over one fixed, sorted draw set. With common draws the empirical
/// curve is a monotone step function and the result is the step location.
inline double mc_threshold(const NoiseModel& model, double epsilon, const MonteCarloConfig& cfg,
                           Tolerance tol = {0.0, 1e-9, 400}) {
    cfg.validate();
    detail::check_epsilon(epsilon);
    validate(model);
    if (is_degenerate(model)) return 0.0;

    const CommonDraws draws(model, cfg);
    const double n = static_cast<double>(draws.size());
    const double target = 1.0 - epsilon;
    auto xi_hat = [&](double p_w) {
        if (p_w == 0.0) return 1.0;
        return 1.0 - static_cast<double>(draws.hits(p_w, optimal_gamma(model, p_w))) / n;
    };
    auto meets = [&](double p_w) { return xi_hat(p_w) >= target ? 1.0 : 0.0; };

    const double scale = uncertainty_scale(model);
    double hi = scale;
    while (meets(hi) == 1.0) {
        hi *= 2.0;
        if (hi > 1e3 * scale) throw ConvergenceError("mc_threshold: bracket growth limit reached", hi);
    }
    return bisect(meets, 0.0, hi, 0.5, tol);
}

/// Statistical half-width of mc_threshold: the binomial half-width of xi_avg at
/// the threshold divided by the slope of the analytic xi_avg there.
inline double mc_threshold_half_width(const NoiseModel& model, double epsilon, double threshold,
                                      const MonteCarloConfig& cfg) {
    const double xi_hw = cfg.confidence_z * std::sqrt(epsilon * (1.0 - epsilon) / static_cast<double>(cfg.trials));
    const double h = std::max(1e-4 * threshold, 1e-6 * uncertainty_scale(model));
    const double lo = std::max(0.0, threshold - h);
    const double slope = (xi_avg(model, threshold + h).xi_avg - xi_avg(model, lo).xi_avg) / (threshold + h - lo);
    if (slope == 0.0) return 0.0;
    return xi_hw / std::abs(slope);
}

struct DetectorEstimate {
    EstimateWithCI p_fa;
    EstimateWithCI p_md;
};

/// Sample-level radiometer trials: per trial N noise-only samples (H0) and N
/// signal-plus-noise samples (H1), deciding D1 when the mean energy exceeds gamma.
inline DetectorEstimate simulate_detector(double sigma_w_sq, double p_w, std::uint64_t n_samples, double gamma,
                                          const MonteCarloConfig& cfg) {
    cfg.validate();
    detail::check_power(p_w);
    if (!(sigma_w_sq > 0.0)) throw DomainError("simulate_detector: sigma_w_sq must be positive");
    if (n_samples == 0) throw DomainError("simulate_detector: n_samples must be positive");

    constexpr std::uint64_t kTrialBlock = 1024;
    const std::uint64_t blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;
    const double sd0 = std::sqrt(sigma_w_sq);
    const double sd1 = std::sqrt(p_w + sigma_w_sq);
    const double inv_n = 1.0 / static_cast<double>(n_samples);

    std::vector<std::pair<std::uint64_t, std::uint64_t>> block_counts(blocks);
    auto run = [&](std::uint64_t first, std::uint64_t stride) {
        for (std::uint64_t b = first; b < blocks; b += stride) {
            RandomStream h0(substream_seed(cfg.seed, 2 * b));
            RandomStream h1(substream_seed(cfg.seed, 2 * b + 1));
            const std::uint64_t trials = std::min(kTrialBlock, cfg.trials - b * kTrialBlock);
            std::uint64_t false_alarms = 0;
            std::uint64_t misses = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                double e0 = 0.0;
                double e1 = 0.0;
                for (std::uint64_t i = 0; i < n_samples; ++i) {
                    const double y0 = sd0 * h0.normal();
                    const double y1 = sd1 * h1.normal();
                    e0 += y0 * y0;
                    e1 += y1 * y1;
                }
                false_alarms += e0 * inv_n > gamma ? 1 : 0;
                misses += e1 * inv_n > gamma ? 0 : 1;
            }
            block_counts[b] = {false_alarms, misses};
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(blocks)));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    }

    std::uint64_t false_alarms = 0;
    std::uint64_t misses = 0;
    for (const auto& [fa, md] : block_counts) {
        false_alarms += fa;
        misses += md;
    }
    return {proportion(false_alarms, cfg.trials, cfg.confidence_z), proportion(misses, cfg.trials, cfg.confidence_z)};
}

}  // namespace covert
