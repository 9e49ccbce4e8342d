#pragma once

// Willie's radiometer. The statistic is the mean received energy
// T = (1/N) sum |y[n]|^2; for large N it is approximately
//   H0: N(sigma_w^2, 2 sigma_w^4 / N)
//   H1: N(P_w + sigma_w^2, 2 (P_w + sigma_w^2)^2 / N)
// and as N -> infinity the error sum collapses to the 0/1 indicator
// returned by asymptotic_xi().

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "covert/error.hpp"
#include "covert/units_special.hpp"

namespace covert {

/// Received signal power at Willie and the observation length; an empty
/// `n_samples` denotes the N -> infinity regime.
struct DetectionScenario {
    double p_w = 0.0;
    std::optional<std::uint64_t> n_samples;

    bool asymptotic() const { return !n_samples.has_value(); }

    void validate() const {
        if (!(p_w >= 0.0) || !std::isfinite(p_w)) throw DomainError("DetectionScenario: p_w must be >= 0");
        if (n_samples && *n_samples == 0) throw DomainError("DetectionScenario: n_samples must be positive");
    }
};

struct DetectorErrors {
    double p_fa;  ///< P(D1 | H0)
    double p_md;  ///< P(D0 | H1)
    double xi;    ///< p_fa + p_md
};

inline double test_statistic(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("test_statistic: no samples");
    double acc = 0.0;
    for (double y : samples) acc += y * y;
    return acc / static_cast<double>(samples.size());
}

/// CLT approximations of the false-alarm and misdetection probabilities.
inline DetectorErrors finite_n_errors(double sigma_w_sq, double gamma, const DetectionScenario& scenario) {
    scenario.validate();
    if (scenario.asymptotic()) throw DomainError("finite_n_errors: scenario must have a finite sample count");
    if (!(sigma_w_sq > 0.0)) throw DomainError("finite_n_errors: sigma_w_sq must be positive");
    const double spread = std::sqrt(2.0 / static_cast<double>(*scenario.n_samples));
    const double h1_power = scenario.p_w + sigma_w_sq;
    const double p_fa = q_function((gamma - sigma_w_sq) / (spread * sigma_w_sq));
    const double p_md = 1.0 - q_function((gamma - h1_power) / (spread * h1_power));
    return {p_fa, p_md, p_fa + p_md};
}

/// 0 when gamma lies in the closed interval [sigma_w^2, P_w + sigma_w^2], else 1.
inline double asymptotic_xi(double sigma_w_sq, double gamma, double p_w) {
    if (!(sigma_w_sq > 0.0)) throw DomainError("asymptotic_xi: sigma_w_sq must be positive");
    return (sigma_w_sq <= gamma && gamma <= p_w + sigma_w_sq) ? 0.0 : 1.0;
}

}  // namespace covert
