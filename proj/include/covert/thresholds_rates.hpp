#pragma once

// Largest received power at Willie that keeps xi_avg >= 1 - epsilon, and the
// rate Bob can then be served at.
//
// Bounded prior:   P_LU = (rho^(2 eps - 1) - 1/rho) sigma_n^2
// Log-normal prior (via its Gaussian surrogate, a = phi1 / sqrt(2 phi2)):
//   eps <  erf(a)/phi3:  P_LN = 2 sqrt(2 phi2) erfinv(phi3 eps)
//   otherwise:           P_LN = phi1 - sqrt(2 phi2) erfinv(erf(a) - 2 phi3 eps)
// Both branches meet at P = 2 phi1.
//
// p_threshold_oracle() solves the same equation numerically against the exact
// prior, so it also measures how much the surrogate costs.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <variant>

#include "covert/covertness_metrics.hpp"
#include "covert/error.hpp"
#include "covert/noise_models.hpp"
#include "covert/units_special.hpp"

namespace covert {

/// Required covertness: xi_avg >= 1 - epsilon and, optionally, p_out <= delta.
struct CovertnessRequirement {
    double epsilon = 0.1;
    std::optional<double> delta;

    void validate() const {
        detail::check_epsilon(epsilon);
        if (delta && !(*delta > 0.0 && *delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    }

    /// Asymptotically xi_avg >= 1 - a and p_out <= a coincide, so the binding
    /// level is the tighter of the two.
    double binding_epsilon() const { return delta ? std::min(epsilon, *delta) : epsilon; }
};

struct LinkGeometry {
    double r_b = 1.0;         ///< Alice-Bob distance
    double r_w = 1.0;         ///< Alice-Willie distance
    double alpha = 2.0;       ///< path-loss exponent
    double sigma_b_sq = 1.0;  ///< Bob's noise power, linear

    void validate() const {
        for (double v : {r_b, r_w, alpha, sigma_b_sq}) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("LinkGeometry: all fields must be positive and finite");
        }
    }

    /// Transmit power that produces `p_w` at Willie.
    double transmit_power(double p_w) const { return std::pow(r_w, alpha) * p_w; }
};

inline double p_threshold_logu(const LogUniformModel& model, double epsilon) {
    detail::check_epsilon(epsilon);
    model.validate();
    return std::max(0.0, (std::pow(model.rho, 2.0 * epsilon - 1.0) - 1.0 / model.rho) * model.sigma_n_sq);
}

/// Power bound below which the worst-case measure xi_up equals 1.
inline double worst_case_power_bound(const LogUniformModel& model) {
    model.validate();
    return (model.rho - 1.0 / model.rho) * model.sigma_n_sq;
}

inline double p_threshold_logn_approx(const LogNormalModel& model, double epsilon) {
    detail::check_epsilon(epsilon);
    const auto p = gaussian_approx_params(model);
    if (p.phi2 == 0.0) return 0.0;
    const double scale = std::sqrt(2.0 * p.phi2);
    const double erf_a = std::erf(p.phi1 / scale);
    if (epsilon < erf_a / p.phi3) return 2.0 * scale * erfinv(p.phi3 * epsilon);

    const double arg = erf_a - 2.0 * p.phi3 * epsilon;
    if (!(arg > -1.0)) {
        std::ostringstream msg;
        msg << "p_threshold_logn_approx: epsilon=" << epsilon
            << " is too close to 1 for the truncated Gaussian surrogate (erfinv argument " << arg << ")";
        throw DomainError(msg.str());
    }
    return p.phi1 - scale * erfinv(arg);
}

/// Closed-form threshold of any model: P_LU for the bounded prior, the
/// surrogate formula for both log-normal variants.
inline double p_threshold_closed(const NoiseModel& model, double epsilon) {
    return std::visit(detail::Overloaded{
                          [&](const LogUniformModel& m) { return p_threshold_logu(m, epsilon); },
                          [&](const LogNormalModel& m) { return p_threshold_logn_approx(m, epsilon); },
                          [&](const GaussianApproxModel& m) { return p_threshold_logn_approx(m.base, epsilon); },
                      },
                      model);
}

/// Solves xi_avg(P_w) = 1 - epsilon by bisection on the numeric-minimization
/// path, which uses only the prior's cdf.
inline double p_threshold_oracle(const NoiseModel& model, double epsilon, Tolerance tol = {0.0, 1e-10, 400}) {
    detail::check_epsilon(epsilon);
    validate(model);
    if (is_degenerate(model)) return 0.0;

    const double target = 1.0 - epsilon;
    auto xi = [&](double p_w) { return xi_avg_numeric(model, p_w).xi_avg; };

    const double scale = uncertainty_scale(model);
    double hi = scale;
    while (!(xi(hi) < target)) {
        hi *= 2.0;
        if (hi > 1e3 * scale) throw ConvergenceError("p_threshold_oracle: bracket growth limit reached", hi);
    }
    return bisect(xi, 0.0, hi, target, tol);
}

/// Bits per real channel use when Willie sees `threshold_at_willie`.
inline double covert_rate(double threshold_at_willie, const LinkGeometry& geometry) {
    geometry.validate();
    if (!(threshold_at_willie >= 0.0)) throw DomainError("covert_rate: threshold must be >= 0");
    const double snr = geometry.transmit_power(threshold_at_willie) /
                       (std::pow(geometry.r_b, geometry.alpha) * geometry.sigma_b_sq);
    return 0.5 * std::log1p(snr) / std::numbers::ln2;
}

}  // namespace covert
