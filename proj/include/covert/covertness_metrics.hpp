#pragma once

// Covertness measures of a noise-uncertainty model in the N -> infinity regime.
//
// With the 0/1 error indicator, Willie errs unless sigma_w^2 falls in the
// window [gamma - P_w, gamma]. Averaging over the prior therefore reduces to
// one minus the prior mass of that window:
//
//   xi_avg(gamma) = 1 - [F(gamma) - F(gamma - P_w)]
//
// and Willie's optimal threshold places the width-P_w window over the most
// probable stretch of noise powers. The outage probability is the prior mass
// of that same window, so p_out = 1 - xi_avg exactly here; the epsilon
// argument of p_out() only matters for finite-N error surfaces, which are
// outside this library.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>

#include "covert/detector.hpp"
#include "covert/error.hpp"
#include "covert/noise_models.hpp"
#include "covert/units_special.hpp"

namespace covert {

enum class Method { closed_form, quadrature, monte_carlo };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

struct CovertnessReport {
    double gamma_star = 0.0;
    double xi_avg = 1.0;
    double p_out = 0.0;
    double xi_up = 1.0;
    Method method = Method::closed_form;
};

namespace detail {
inline void check_power(double p_w) {
    if (!(p_w >= 0.0) || !std::isfinite(p_w)) throw DomainError("received power p_w must be finite and >= 0");
}
inline void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
}
}  // namespace detail

/// Prior mass of (gamma - P_w, gamma]: the probability that Willie decides correctly.
inline double window_mass(const NoiseModel& model, double p_w, double gamma) {
    detail::check_power(p_w);
    if (p_w == 0.0) return 0.0;
    return std::clamp(cdf(model, gamma) - cdf(model, std::max(gamma - p_w, 0.0)), 0.0, 1.0);
}

/// Average error sum at a fixed threshold.
inline double xi_avg_at_gamma(const NoiseModel& model, double p_w, double gamma) {
    return 1.0 - window_mass(model, p_w, gamma);
}

/// Same quantity by direct adaptive quadrature of xi(sigma_w^2, gamma) f(sigma_w^2).
/// Independent of cdf(); kept as a cross-check of the window identity.
inline double xi_avg_at_gamma_quadrature(const NoiseModel& model, double p_w, double gamma,
                                         Tolerance tol = {1e-12, 1e-10, 60}) {
    detail::check_power(p_w);
    if (is_degenerate(model)) throw DomainError("xi_avg_at_gamma_quadrature: model has no density");
    const auto support = effective_support(model);
    auto integrand = [&](double s) { return s > 0.0 ? asymptotic_xi(s, gamma, p_w) * pdf(model, s) : 0.0; };

    // Split at the window edges so each piece has a smooth integrand.
    double cuts[4] = {support.lo, std::clamp(gamma - p_w, support.lo, support.hi),
                      std::clamp(gamma, support.lo, support.hi), support.hi};
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (cuts[i + 1] > cuts[i]) total += integrate(integrand, cuts[i], cuts[i + 1], tol);
    }
    return std::clamp(total, 0.0, 1.0);
}

/// Range of thresholds that can place the window anywhere over non-negligible mass.
inline Interval gamma_search_bracket(const NoiseModel& model, double p_w) {
    if (std::holds_alternative<LogUniformModel>(model)) {
        const auto& m = std::get<LogUniformModel>(model);
        return {m.lower(), m.upper() + p_w};
    }
    constexpr double kTail = 1e-9;
    return {quantile(model, kTail), quantile(model, 1.0 - kTail) + p_w};
}

/// Threshold minimizing xi_avg_at_gamma by grid scan plus golden-section refinement.
inline double optimal_gamma_numeric(const NoiseModel& model, double p_w) {
    detail::check_power(p_w);
    validate(model);
    if (is_degenerate(model)) return nominal_power(model);
    const auto bracket = gamma_search_bracket(model, p_w);
    return minimize_scalar([&](double g) { return xi_avg_at_gamma(model, p_w, g); }, bracket.lo, bracket.hi).argmin;
}

/// Willie's optimal threshold: P_w + sigma_n^2/rho for the bounded model,
/// max(phi1 + P_w/2, P_w) for the Gaussian surrogate, numeric for the exact log-normal.
inline double optimal_gamma(const NoiseModel& model, double p_w) {
    detail::check_power(p_w);
    validate(model);
    return std::visit(detail::Overloaded{
                          [&](const LogUniformModel& m) {
                              return m.degenerate() ? m.sigma_n_sq : p_w + m.sigma_n_sq / m.rho;
                          },
                          [&](const LogNormalModel&) { return optimal_gamma_numeric(model, p_w); },
                          [&](const GaussianApproxModel& m) {
                              return m.degenerate() ? m.params.phi1 : std::max(m.params.phi1 + 0.5 * p_w, p_w);
                          },
                      },
                      model);
}

/// Worst-case measure min_gamma max_{sigma_w^2} xi. Only a bounded prior can be
/// fully covered by one window, which needs P_w >= (rho - 1/rho) sigma_n^2.
/// With P_w = 0 there is nothing to detect and the value is 1.
inline double xi_up(const NoiseModel& model, double p_w) {
    detail::check_power(p_w);
    validate(model);
    if (p_w == 0.0) return 1.0;
    if (const auto* m = std::get_if<LogUniformModel>(&model)) {
        return p_w < (m->rho - 1.0 / m->rho) * m->sigma_n_sq ? 1.0 : 0.0;
    }
    return 1.0;
}

/// Average covert probability by numeric minimization over gamma for any model.
inline CovertnessReport xi_avg_numeric(const NoiseModel& model, double p_w) {
    CovertnessReport r;
    r.method = Method::quadrature;
    r.gamma_star = optimal_gamma_numeric(model, p_w);
    r.xi_avg = p_w == 0.0 ? 1.0 : xi_avg_at_gamma(model, p_w, r.gamma_star);
    r.p_out = 1.0 - r.xi_avg;
    r.xi_up = xi_up(model, p_w);
    return r;
}

/// Average covert probability with Willie at his optimal threshold. Closed
/// forms for the bounded model and the Gaussian surrogate; the exact
/// log-normal goes through the numeric path.
inline CovertnessReport xi_avg(const NoiseModel& model, double p_w) {
    detail::check_power(p_w);
    validate(model);
    if (std::holds_alternative<LogNormalModel>(model)) return xi_avg_numeric(model, p_w);

    CovertnessReport r;
    r.method = Method::closed_form;
    r.gamma_star = optimal_gamma(model, p_w);
    r.xi_up = xi_up(model, p_w);
    if (p_w == 0.0) {
        r.xi_avg = 1.0;
    } else if (const auto* m = std::get_if<LogUniformModel>(&model)) {
        const double s = m->sigma_n_sq;
        if (p_w >= (m->rho - 1.0 / m->rho) * s) {
            r.xi_avg = 0.0;
        } else {
            r.xi_avg = std::log(m->rho * m->rho * s / (m->rho * p_w + s)) / (2.0 * std::log(m->rho));
        }
    } else {
        const auto& g = std::get<GaussianApproxModel>(model);
        const auto& p = g.params;
        if (g.degenerate()) {
            r.xi_avg = 0.0;
        } else {
            const double scale = std::sqrt(2.0 * p.phi2);
            if (p_w < 2.0 * p.phi1) {
                r.xi_avg = 1.0 - std::erf(p_w / (2.0 * scale)) / p.phi3;
            } else {
                r.xi_avg = 1.0 - (std::erf(p.phi1 / scale) - std::erf((p.phi1 - p_w) / scale)) / (2.0 * p.phi3);
            }
        }
    }
    r.xi_avg = std::clamp(r.xi_avg, 0.0, 1.0);
    r.p_out = 1.0 - r.xi_avg;
    return r;
}

/// Covert outage probability. Equal to 1 - xi_avg for every epsilon because
/// the asymptotic error sum only takes the values 0 and 1.
inline double p_out(const NoiseModel& model, double p_w, double epsilon) {
    detail::check_epsilon(epsilon);
    return xi_avg(model, p_w).p_out;
}

}  // namespace covert
