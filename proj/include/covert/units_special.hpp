#pragma once

// Scalar numerics shared by every other module: decibel conversion, the
// error function family, adaptive quadrature, bracketed 1-D minimization and
// bisection. Everything here is a pure function of its arguments.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "covert/error.hpp"

namespace covert {

/// ln(10)/10: converts a power ratio in dB to nepers of power, 10^(x/10) = e^(k x).
inline constexpr double kDbToLn = std::numbers::ln10 / 10.0;

/// Power ratio expressed in decibels.
struct Decibel {
    double value_db = 0.0;
};

/// Absolute/relative stopping tolerances plus an iteration budget.
/// The meaning of `max_iter` is per algorithm (subdivision depth for
/// `integrate`, iteration count for `minimize_scalar` and `bisect`).
struct Tolerance {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_iter = 60;

    void validate() const {
        if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || !(abs_tol + rel_tol > 0.0))
            throw DomainError("Tolerance: abs_tol, rel_tol must be >= 0 with a positive sum");
        if (max_iter <= 0) throw DomainError("Tolerance: max_iter must be positive");
    }
};

inline double db_to_linear(Decibel x) {
    if (!std::isfinite(x.value_db)) throw DomainError("db_to_linear: non-finite input");
    return std::pow(10.0, x.value_db / 10.0);
}

inline Decibel linear_to_db(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("linear_to_db: input must be positive and finite");
    return Decibel{10.0 * std::log10(x)};
}

inline double erf(double x) { return std::erf(x); }
inline double erfc(double x) { return std::erfc(x); }

namespace detail {

// Single-precision-quality starting point (M. Giles, "Approximating the erfinv
// function"); Newton polishing below takes it to full double precision.
inline double erfinv_initial_guess(double y) {
    double w = -std::log((1.0 - y) * (1.0 + y));
    double p;
    if (w < 5.0) {
        w -= 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        w = std::sqrt(w) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    return p * y;
}

}  // namespace detail

/// Inverse error function on (-1, 1).
///
/// Bracketed Newton iteration on erf. For y > 1/2 the residual is formed from
/// erfc so that arguments close to 1 keep their relative accuracy.
inline double erfinv(double y) {
    if (!(y > -1.0 && y < 1.0)) throw DomainError("erfinv: argument must lie in (-1, 1)");
    if (y == 0.0) return 0.0;
    if (y < 0.0) return -erfinv(-y);

    const double tail = 1.0 - y;  // exact for y >= 1/2
    auto residual = [&](double x) {
        return y > 0.5 ? tail - std::erfc(x) : std::erf(x) - y;
    };

    double lo = 0.0;
    double hi = 6.0;  // erf(6) rounds to 1, so the root is below 6
    double x = detail::erfinv_initial_guess(y);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

    for (int iter = 0; iter < 100; ++iter) {
        const double r = residual(x);
        if (r == 0.0) return x;
        if (r > 0.0) hi = x; else lo = x;
        const double slope = std::numbers::inv_sqrtpi * 2.0 * std::exp(-x * x);
        double next = x - r / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return next;
        x = next;
    }
    return x;
}

/// Standard normal upper tail probability.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile, p in (0, 1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
    return std::numbers::sqrt2 * erfinv(2.0 * p - 1.0);
}

namespace detail {

// 15-point Gauss-Kronrod rule with embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct QuadSegment {
    double lo;
    double hi;
    double value;
    double error;
    int depth;
    bool operator<(const QuadSegment& other) const { return error < other.error; }
};

template <class F>
QuadSegment gauss_kronrod15(F& f, double lo, double hi, int depth) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod)) throw DomainError("integrate: integrand produced a non-finite value");
    return {lo, hi, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f over [lo, hi].
///
/// The segment with the largest error estimate is bisected until the summed
/// estimate satisfies max(abs_tol, rel_tol*|I|). `tol.max_iter` bounds the
/// subdivision depth; hitting it throws ConvergenceError with the best value.
template <class F>
double integrate(F&& f, double lo, double hi, Tolerance tol = {}) {
    tol.validate();
    if (!(lo < hi)) throw DomainError("integrate: require lo < hi");

    std::priority_queue<detail::QuadSegment> segments;
    auto first = detail::gauss_kronrod15(f, lo, hi, 0);
    double total = first.value;
    double total_err = first.error;
    segments.push(first);

    constexpr std::size_t kMaxSegments = 100000;
    while (total_err > std::max(tol.abs_tol, tol.rel_tol * std::abs(total))) {
        const auto worst = segments.top();
        if (worst.depth >= tol.max_iter || segments.size() >= kMaxSegments)
            throw ConvergenceError("integrate: subdivision budget exhausted", total);
        segments.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        auto left = detail::gauss_kronrod15(f, worst.lo, mid, worst.depth + 1);
        auto right = detail::gauss_kronrod15(f, mid, worst.hi, worst.depth + 1);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        segments.push(left);
        segments.push(right);
        if (total_err < 0.0) total_err = 0.0;
    }

    // Re-sum to shed the drift accumulated by the incremental updates.
    double resum = 0.0;
    while (!segments.empty()) {
        resum += segments.top().value;
        segments.pop();
    }
    return resum;
}

struct MinimizeResult {
    double argmin;
    double min;
};

/// Grid scan followed by golden-section refinement around the best node.
///
/// Does not assume unimodality globally, only within the two grid cells that
/// straddle the best node. Ties resolve to the smallest abscissa.
template <class F>
MinimizeResult minimize_scalar(F&& f, double lo, double hi,
                               Tolerance tol = {0.0, 1e-13, 200},
                               std::size_t grid_points = 4096) {
    tol.validate();
    if (!(lo < hi)) throw DomainError("minimize_scalar: require lo < hi");
    if (grid_points < 2) grid_points = 2;

    auto eval = [&](double x) {
        const double v = f(x);
        if (!std::isfinite(v)) throw DomainError("minimize_scalar: objective is not finite at " + std::to_string(x));
        return v;
    };

    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    auto node = [&](std::size_t i) { return i + 1 == grid_points ? hi : lo + step * static_cast<double>(i); };

    std::size_t best_i = 0;
    MinimizeResult best{lo, eval(lo)};
    for (std::size_t i = 1; i < grid_points; ++i) {
        const double x = node(i);
        const double v = eval(x);
        if (v < best.min) {
            best = {x, v};
            best_i = i;
        }
    }

    double a = node(best_i == 0 ? 0 : best_i - 1);
    double b = node(best_i + 1 >= grid_points ? grid_points - 1 : best_i + 1);
    constexpr double kInvPhi = 0.6180339887498948482;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    for (int iter = 0; iter < tol.max_iter; ++iter) {
        if (b - a <= tol.abs_tol + tol.rel_tol * std::max(std::abs(a), std::abs(b))) break;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = eval(d);
        }
    }

    for (const auto& [x, v] : {std::pair{c, fc}, std::pair{d, fd}}) {
        if (v < best.min || (v == best.min && x < best.argmin)) best = {x, v};
    }
    return best;
}

/// Solves f(x) = target for monotone f bracketed by [lo, hi].
///
/// Stops when |f(x) - target| <= abs_tol or the bracket is narrower than
/// abs_tol + rel_tol*|x|. Works for increasing or decreasing f.
template <class F>
double bisect(F&& f, double lo, double hi, double target, Tolerance tol = {0.0, 1e-12, 400}) {
    tol.validate();
    if (!(lo < hi)) throw DomainError("bisect: require lo < hi");
    const double flo = f(lo) - target;
    const double fhi = f(hi) - target;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0) || std::isnan(flo) || std::isnan(fhi))
        throw DomainError("bisect: target is not bracketed by [lo, hi]");
    const bool increasing = flo < 0.0;

    for (int iter = 0; iter < tol.max_iter; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        if (hi - lo <= tol.abs_tol + tol.rel_tol * std::max(std::abs(lo), std::abs(hi))) return mid;
        const double fm = f(mid) - target;
        if (std::abs(fm) <= tol.abs_tol) return mid;
        if ((fm < 0.0) == increasing) lo = mid; else hi = mid;
    }
    throw ConvergenceError("bisect: iteration budget exhausted", 0.5 * (lo + hi));
}

}  // namespace covert
