#pragma once

// A-priori distributions of the warden's noise power sigma_w^2.
//
//   LogUniformModel      bounded: sigma_w^2 uniform in dB over
//                        [sigma_n^2/rho, rho*sigma_n^2], pdf 1/(2 ln(rho) x).
//   LogNormalModel       unbounded: dB offset from nominal ~ N(0, sigma_delta_db^2).
//   GaussianApproxModel  moment-matched Gaussian surrogate of a LogNormalModel,
//                        truncated to x > 0 and renormalized by phi3.
//
// A zero uncertainty parameter (rho == 1, sigma_delta_db == 0) is accepted as
// the no-uncertainty limit: all mass sits at the nominal power, pdf() is 0
// everywhere and cdf() is a unit step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "covert/error.hpp"
#include "covert/rng.hpp"
#include "covert/units_special.hpp"

namespace covert {

struct LogUniformModel {
    double sigma_n_sq = 1.0;  ///< nominal noise power, linear
    double rho = 2.0;         ///< uncertainty size, rho >= 1 (rho_dB = 10 log10 rho)

    static LogUniformModel from_db(double sigma_n_db, double rho_db) {
        LogUniformModel m{db_to_linear(Decibel{sigma_n_db}), db_to_linear(Decibel{rho_db})};
        m.validate();
        return m;
    }

    void validate() const {
        if (!(sigma_n_sq > 0.0) || !std::isfinite(sigma_n_sq))
            throw DomainError("LogUniformModel: sigma_n_sq must be positive and finite");
        if (!(rho >= 1.0) || !std::isfinite(rho)) throw DomainError("LogUniformModel: rho must be >= 1");
    }

    double lower() const { return sigma_n_sq / rho; }
    double upper() const { return rho * sigma_n_sq; }
    bool degenerate() const { return rho == 1.0; }
};

struct LogNormalModel {
    double sigma_n_db = 0.0;      ///< nominal noise power in dB
    double sigma_delta_db = 1.0;  ///< std of the dB-domain offset, >= 0

    void validate() const {
        if (!std::isfinite(sigma_n_db)) throw DomainError("LogNormalModel: sigma_n_db must be finite");
        if (!(sigma_delta_db >= 0.0) || !std::isfinite(sigma_delta_db))
            throw DomainError("LogNormalModel: sigma_delta_db must be >= 0");
    }

    /// Mean and standard deviation of ln(sigma_w^2).
    double log_mean() const { return kDbToLn * sigma_n_db; }
    double log_std() const { return kDbToLn * sigma_delta_db; }
    bool degenerate() const { return sigma_delta_db == 0.0; }
};

struct GaussianApproxParams {
    double phi1;  ///< mean of the exact log-normal
    double phi2;  ///< variance of the exact log-normal
    double phi3;  ///< P(X > 0) of the untruncated Gaussian
};

/// phi1, phi2 are the exact log-normal mean and variance; phi3 normalizes the
/// Gaussian with those moments to the half line x > 0.
inline GaussianApproxParams gaussian_approx_params(const LogNormalModel& m) {
    m.validate();
    const double mu = m.log_mean();
    const double s2 = m.log_std() * m.log_std();
    const double phi1 = std::exp(mu + 0.5 * s2);
    const double phi2 = std::expm1(s2) * std::exp(2.0 * mu + s2);
    const double phi3 = 0.5 * std::erfc(-phi1 / std::sqrt(2.0 * phi2));
    return {phi1, phi2, phi3};
}

struct GaussianApproxModel {
    LogNormalModel base;
    GaussianApproxParams params;

    explicit GaussianApproxModel(const LogNormalModel& m) : base(m), params(gaussian_approx_params(m)) {}

    double stddev() const { return std::sqrt(params.phi2); }
    /// Standardized location of the truncation point x = 0.
    double z_floor() const { return -params.phi1 / stddev(); }
    bool degenerate() const { return params.phi2 == 0.0; }
};

using NoiseModel = std::variant<LogUniformModel, LogNormalModel, GaussianApproxModel>;

namespace detail {
template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace detail

inline void validate(const NoiseModel& model) {
    std::visit(detail::Overloaded{
                   [](const LogUniformModel& m) { m.validate(); },
                   [](const LogNormalModel& m) { m.validate(); },
                   [](const GaussianApproxModel& m) { m.base.validate(); },
               },
               model);
}

/// "logu", "logn" or "logn-approx".
inline std::string model_kind(const NoiseModel& model) {
    return std::visit(detail::Overloaded{
                          [](const LogUniformModel&) { return std::string("logu"); },
                          [](const LogNormalModel&) { return std::string("logn"); },
                          [](const GaussianApproxModel&) { return std::string("logn-approx"); },
                      },
                      model);
}

inline bool is_degenerate(const NoiseModel& model) {
    return std::visit([](const auto& m) { return m.degenerate(); }, model);
}

/// Nominal noise power sigma_n^2 in linear units.
inline double nominal_power(const NoiseModel& model) {
    return std::visit(detail::Overloaded{
                          [](const LogUniformModel& m) { return m.sigma_n_sq; },
                          [](const LogNormalModel& m) { return db_to_linear(Decibel{m.sigma_n_db}); },
                          [](const GaussianApproxModel& m) { return db_to_linear(Decibel{m.base.sigma_n_db}); },
                      },
                      model);
}

/// Natural power scale of the uncertainty: the width (rho - 1/rho) sigma_n^2 of
/// the bounded support, or the standard deviation sqrt(phi2) of the noise power.
inline double uncertainty_scale(const NoiseModel& model) {
    return std::visit(detail::Overloaded{
                          [](const LogUniformModel& m) { return (m.rho - 1.0 / m.rho) * m.sigma_n_sq; },
                          [](const LogNormalModel& m) { return std::sqrt(gaussian_approx_params(m).phi2); },
                          [](const GaussianApproxModel& m) { return m.stddev(); },
                      },
                      model);
}

struct Interval {
    double lo;
    double hi;
};

/// Interval holding all but a negligible (< 1e-30) share of the mass; exact for
/// the bounded model. Used to bracket integrals and threshold searches.
inline Interval effective_support(const NoiseModel& model) {
    constexpr double kTailZ = 12.0;
    return std::visit(detail::Overloaded{
                          [](const LogUniformModel& m) { return Interval{m.lower(), m.upper()}; },
                          [](const LogNormalModel& m) {
                              return Interval{std::exp(m.log_mean() - kTailZ * m.log_std()),
                                              std::exp(m.log_mean() + kTailZ * m.log_std())};
                          },
                          [](const GaussianApproxModel& m) {
                              return Interval{std::max(0.0, m.params.phi1 - kTailZ * m.stddev()),
                                              m.params.phi1 + kTailZ * m.stddev()};
                          },
                      },
                      model);
}

inline double pdf(const NoiseModel& model, double x) {
    return std::visit(
        detail::Overloaded{
            [x](const LogUniformModel& m) {
                if (m.degenerate() || x < m.lower() || x > m.upper()) return 0.0;
                return 1.0 / (2.0 * std::log(m.rho) * x);
            },
            [x](const LogNormalModel& m) {
                if (m.degenerate() || !(x > 0.0)) return 0.0;
                const double s = m.log_std();
                const double d = std::log(x) - m.log_mean();
                return std::exp(-d * d / (2.0 * s * s)) / (x * s * std::sqrt(2.0 * std::numbers::pi));
            },
            [x](const GaussianApproxModel& m) {
                if (m.degenerate() || !(x > 0.0)) return 0.0;
                const auto& p = m.params;
                const double d = x - p.phi1;
                return std::exp(-d * d / (2.0 * p.phi2)) / (std::sqrt(2.0 * std::numbers::pi * p.phi2) * p.phi3);
            },
        },
        model);
}

inline double cdf(const NoiseModel& model, double x) {
    return std::visit(
        detail::Overloaded{
            [x](const LogUniformModel& m) {
                if (m.degenerate()) return x >= m.sigma_n_sq ? 1.0 : 0.0;
                if (!(x > 0.0)) return 0.0;
                return std::clamp(std::log(m.rho * x / m.sigma_n_sq) / (2.0 * std::log(m.rho)), 0.0, 1.0);
            },
            [x](const LogNormalModel& m) {
                if (!(x > 0.0)) return 0.0;
                if (m.degenerate()) return x >= std::exp(m.log_mean()) ? 1.0 : 0.0;
                return normal_cdf((std::log(x) - m.log_mean()) / m.log_std());
            },
            [x](const GaussianApproxModel& m) {
                if (!(x > 0.0)) return 0.0;
                if (m.degenerate()) return x >= m.params.phi1 ? 1.0 : 0.0;
                const double z = (x - m.params.phi1) / m.stddev();
                // Upper half via the tail keeps precision where both CDFs are near 1.
                const double value = z >= 0.0 ? 1.0 - q_function(z) / m.params.phi3
                                              : (normal_cdf(z) - normal_cdf(m.z_floor())) / m.params.phi3;
                return std::clamp(value, 0.0, 1.0);
            },
        },
        model);
}

/// Inverse CDF, p in (0, 1).
inline double quantile(const NoiseModel& model, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
    return std::visit(
        detail::Overloaded{
            [p](const LogUniformModel& m) { return m.lower() * std::exp(2.0 * std::log(m.rho) * p); },
            [p](const LogNormalModel& m) { return std::exp(m.log_mean() + m.log_std() * normal_quantile(p)); },
            [p](const GaussianApproxModel& m) {
                if (m.degenerate()) return m.params.phi1;
                const double base = normal_cdf(m.z_floor());
                return std::max(0.0, m.params.phi1 + m.stddev() * normal_quantile(base + p * m.params.phi3));
            },
        },
        model);
}

/// Draws per substream block; block b of a run with seed s uses
/// substream_seed(s, b), so results do not depend on how blocks are scheduled.
inline constexpr std::size_t kSampleBlock = 1 << 16;

namespace detail {

inline void fill_block(const NoiseModel& model, std::uint64_t seed, std::size_t block, double* out, std::size_t n) {
    RandomStream rng(substream_seed(seed, block));
    std::visit(Overloaded{
                   [&](const LogUniformModel& m) {
                       const double two_ln_rho = 2.0 * std::log(m.rho);
                       for (std::size_t i = 0; i < n; ++i) out[i] = m.lower() * std::exp(two_ln_rho * rng.uniform());
                   },
                   [&](const LogNormalModel& m) {
                       for (std::size_t i = 0; i < n; ++i)
                           out[i] = std::exp(kDbToLn * (m.sigma_n_db + m.sigma_delta_db * rng.normal()));
                   },
                   [&](const GaussianApproxModel& m) {
                       const double base = normal_cdf(m.z_floor());
                       for (std::size_t i = 0; i < n; ++i) {
                           const double u = base + rng.uniform() * m.params.phi3;
                           out[i] = m.degenerate()
                                        ? m.params.phi1
                                        : std::max(m.params.phi1 + m.stddev() * normal_quantile(std::min(u, 1.0 - 1e-16)),
                                                   std::numeric_limits<double>::min());
                       }
                   },
               },
               model);
}

}  // namespace detail

/// `count` noise-power draws, deterministic in `seed` for any `workers`.
inline std::vector<double> sample(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                  unsigned workers = 1) {
    if (count == 0) throw DomainError("sample: count must be positive");
    validate(model);
    std::vector<double> out(count);
    const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
    auto run = [&](std::size_t first, std::size_t stride) {
        for (std::size_t b = first; b < blocks; b += stride) {
            const std::size_t begin = b * kSampleBlock;
            detail::fill_block(model, seed, b, out.data() + begin, std::min(kSampleBlock, count - begin));
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    }
    return out;
}

}  // namespace covert
