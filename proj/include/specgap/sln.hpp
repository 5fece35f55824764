#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "specgap/common.hpp"

namespace specgap {

// Diagonal element a = diag(p^{e_1}, ..., p^{e_n}) of SL_n(Q_p).
struct SlnElement {
    int n = 2;
    long long p = 2;
    std::vector<long long> exponents; // nonincreasing, sum zero
    bool regular = false;             // all exponents distinct
};

namespace detail {

inline bool is_prime(long long p) {
    if (p < 2) return false;
    for (long long q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

} // namespace detail

inline SlnElement make_sln_element(long long p, std::vector<long long> exponents) {
    if (exponents.size() < 2) throw validation_error("sln: need n >= 2 exponents");
    if (!detail::is_prime(p)) throw validation_error("sln: p = " + std::to_string(p) + " is not prime");
    long long sum = 0;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (i > 0 && exponents[i] > exponents[i - 1])
            throw validation_error("sln: exponents must be nonincreasing");
        sum += exponents[i];
    }
    if (sum != 0) throw validation_error("sln: exponents must sum to 0 (determinant 1)");
    SlnElement a;
    a.n = static_cast<int>(exponents.size());
    a.p = p;
    a.regular = true;
    for (std::size_t i = 1; i < exponents.size(); ++i)
        if (exponents[i] == exponents[i - 1]) a.regular = false;
    a.exponents = std::move(exponents);
    return a;
}

// Base-p exponent of 1/eta(a): sum over the strongly orthogonal pairs
// (e_i - e_{n+1-i}) for i <= floor(n/2). Nonnegative for nonincreasing e.
inline long long eta_exponent_sum(const SlnElement& a) {
    long long s = 0;
    for (int i = 0; i < a.n / 2; ++i)
        s += a.exponents[static_cast<std::size_t>(i)] -
             a.exponents[static_cast<std::size_t>(a.n - 1 - i)];
    return s;
}

// Base-p exponent of p^{h_m(a)}: the positive-root sum over i < j of e_i - e_j.
inline long long entropy_exponent_sum(const SlnElement& a) {
    long long s = 0;
    for (int i = 0; i < a.n; ++i)
        for (int j = i + 1; j < a.n; ++j)
            s += a.exponents[static_cast<std::size_t>(i)] -
                 a.exponents[static_cast<std::size_t>(j)];
    return s;
}

// -log eta(a) in nats. eta <= 1 by construction, so this is >= 0.
inline double eta_log(const SlnElement& a) {
    return std::log(static_cast<double>(a.p)) * static_cast<double>(eta_exponent_sum(a));
}

// Haar (maximal) entropy h_m(a) in nats.
inline double entropy_sln(const SlnElement& a) {
    return std::log(static_cast<double>(a.p)) * static_cast<double>(entropy_exponent_sum(a));
}

struct NonescapeReport {
    double bound = 0.0;         // max(0, 1 - 2r (h_m - h)/(-log eta))
    double bound_epsilon = 0.0; // max(0, 1 - (h_m - h)/[((1/2 - eps)/r)(-log eta)])
    int r = 1;
    double epsilon = 0.0;
    double entropy_defect = 0.0; // h_m - h, nats
    double eta_log_value = 0.0;
};

// Mass retention from an entropy defect. The defect is the primary input so
// that ratios of exactly representable quantities stay exact; see
// nonescape_sln for the absolute-entropy form. rank_one selects r = 2.
inline NonescapeReport nonescape_sln_defect(const SlnElement& a, double entropy_defect,
                                            bool rank_one, double epsilon) {
    if (!a.regular)
        throw validation_error("nonescape_sln: element must be regular (distinct exponents)");
    if (!(entropy_defect >= 0.0)) throw validation_error("nonescape_sln: need entropy defect >= 0");
    if (!(epsilon >= 0.0 && epsilon < 0.5))
        throw validation_error("nonescape_sln: need epsilon in [0, 1/2)");
    const double el = eta_log(a);
    if (el == 0.0) throw validation_error("nonescape_sln: -log eta = 0 (central element)");
    NonescapeReport rep;
    rep.r = rank_one ? 2 : 1;
    rep.epsilon = epsilon;
    rep.entropy_defect = entropy_defect;
    rep.eta_log_value = el;
    rep.bound = std::max(0.0, 1.0 - (2.0 * rep.r * entropy_defect) / el);
    rep.bound_epsilon =
        std::max(0.0, 1.0 - entropy_defect / (((0.5 - epsilon) / rep.r) * el));
    return rep;
}

// Absolute-entropy form: h is the measure's entropy, h <= h_m(a).
inline NonescapeReport nonescape_sln(const SlnElement& a, double h, bool rank_one,
                                     double epsilon) {
    const double hm = entropy_sln(a);
    if (!(h <= hm))
        throw validation_error("nonescape_sln: need h <= h_m(a) = " + std::to_string(hm));
    return nonescape_sln_defect(a, hm - h, rank_one, epsilon);
}

} // namespace specgap
