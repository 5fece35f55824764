#pragma once

#include <cmath>
#include <cstdint>

#include "specgap/common.hpp"

namespace specgap {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta, modified Lentz.
inline double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw certificate_error("incomplete_beta: continued fraction did not converge");
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw validation_error("incomplete_beta: need a > 0 and b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw validation_error("incomplete_beta: need x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * detail::beta_cf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Inverse of x -> I_x(a, b) by bisection. Monotone, so this is exact to
// adjacent doubles and fully deterministic.
inline double incomplete_beta_inv(double a, double b, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw validation_error("incomplete_beta_inv: need p in [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (incomplete_beta(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct Interval {
    double low;
    double high;
};

// Exact binomial (Clopper-Pearson) two-sided confidence interval.
inline Interval clopper_pearson(long long hits, long long samples, double confidence = 0.99) {
    if (samples <= 0) throw validation_error("clopper_pearson: need samples > 0");
    if (hits < 0 || hits > samples) throw validation_error("clopper_pearson: need 0 <= hits <= samples");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw validation_error("clopper_pearson: need confidence in (0, 1)");
    const double alpha = 1.0 - confidence;
    const double h = static_cast<double>(hits);
    const double n = static_cast<double>(samples);
    Interval ci;
    ci.low = (hits == 0) ? 0.0 : incomplete_beta_inv(h, n - h + 1.0, alpha / 2.0);
    ci.high = (hits == samples) ? 1.0 : incomplete_beta_inv(h + 1.0, n - h, 1.0 - alpha / 2.0);
    return ci;
}

} // namespace specgap
