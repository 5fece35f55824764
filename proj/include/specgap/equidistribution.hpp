#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "specgap/common.hpp"
#include "specgap/ld.hpp"

namespace specgap {

// Parameters of the effective equidistribution inequality. kappa splits the
// mass of Omega; the proof-internal split constant is fixed at
// (mu_omega - kappa)/2.
struct EffectiveEquiParams {
    double alpha = 0.0;   // Bowen-average exponent
    double h = 0.0;       // homogeneity exponent, > 0
    double C_B0h = 1.0;   // homogeneity constant, > 0
    double lambda = 0.5;  // operator norm, in (0,1)
    long long n = 1;      // horizon
    double mu_phi = 0.0;  // mu(phi)
    double m_phiB0 = 0.0; // stationary mean of the thickened/shrunk observable
    double mu_omega = 1.0;
    double kappa = 0.0;
    int k = 1; // theta = lambda^k
    char clause = 'a';
};

struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
};

// Evaluates the effective equidistribution inequality. Clause (a) tests the
// shrunk-observable form with argument [mu(phi) - (1-kappa)]/kappa; clause
// (b) the thickened form with argument mu(phi)/kappa. The log(k) prefactor
// term sits inside the 1/n bracket.
inline InequalityReport effective_inequality(const EffectiveEquiParams& p) {
    if (!(p.lambda > 0.0 && p.lambda < 1.0))
        throw validation_error("effective_inequality: need lambda in (0,1)");
    if (!(p.h > 0.0)) throw validation_error("effective_inequality: need h > 0");
    if (!(p.C_B0h > 0.0)) throw validation_error("effective_inequality: need C_B0h > 0");
    if (p.n < 1) throw validation_error("effective_inequality: need n >= 1");
    if (!(p.mu_phi >= 0.0 && p.mu_phi <= 1.0))
        throw validation_error("effective_inequality: need mu_phi in [0,1]");
    if (!(p.m_phiB0 >= 0.0 && p.m_phiB0 <= 1.0))
        throw validation_error("effective_inequality: need m_phiB0 in [0,1]");
    if (!(p.mu_omega > 0.0 && p.mu_omega <= 1.0))
        throw validation_error("effective_inequality: need mu_omega in (0,1]");
    if (p.k < 1) throw validation_error("effective_inequality: need k >= 1");
    if (p.clause != 'a' && p.clause != 'b')
        throw validation_error("effective_inequality: clause must be 'a' or 'b'");
    if (!(p.kappa > 0.0)) throw validation_error("effective_inequality: need kappa > 0");
    if (!(p.mu_omega > p.kappa))
        throw validation_error("effective_inequality: need mu_omega > kappa, got kappa = " +
                               std::to_string(p.kappa));

    const double theta = detail::pow_int(p.lambda, p.k);
    const double m = p.m_phiB0;

    double arg, target;
    if (p.clause == 'a') {
        // kappa >= (1 - mu_phi)/(1 - m) keeps the argument above m.
        if (!(p.kappa * (1.0 - m) >= 1.0 - p.mu_phi))
            throw validation_error(
                "effective_inequality: clause (a) needs kappa >= (1-mu_phi)/(1-m_phiB0)");
        arg = (p.mu_phi - (1.0 - p.kappa)) / p.kappa;
        target = theta + (1.0 - theta) * m;
        if (!(target <= arg))
            throw validation_error(
                "effective_inequality: k infeasible, need lambda^k <= (arg - m)/(1 - m) with arg = " +
                std::to_string(arg));
    } else {
        // Theorem-statement form: kappa >= mu_phi/m keeps the argument below m.
        if (!(p.kappa * m >= p.mu_phi))
            throw validation_error("effective_inequality: clause (b) needs kappa >= mu_phi/m_phiB0");
        arg = p.mu_phi / p.kappa;
        target = (1.0 - theta) * m;
        if (!(target >= arg))
            throw validation_error(
                "effective_inequality: k infeasible, need lambda^k <= (m - mu_phi/kappa)/m");
    }

    InequalityReport rep;
    rep.lhs = kl_div(arg, target) / (-std::log(theta));
    // log(theta)/log(lambda) = k identically (theta = lambda^k by construction).
    const double bracket = std::log(static_cast<double>(p.k)) + kl_div(p.mu_phi, m) -
                           2.0 * std::log((p.mu_omega - p.kappa) / 2.0) - std::log(p.C_B0h);
    rep.rhs = (p.h - p.alpha) / (-std::log(p.lambda)) + bracket / static_cast<double>(p.n);
    rep.satisfied = rep.lhs <= rep.rhs;
    return rep;
}

struct DeviationReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool consistent = false;
    bool lhs_defined = true;
    std::string clause;
};

// Entropy-vs-deviation consistency check for an invariant measure: a mu with
// |mu(phi) - m(phi)| beyond the theta window must carry at least the stated
// entropy gap. Picks the clause from the sign of mu(phi) - m(phi).
inline DeviationReport entropy_deviation_check(double mu_phi, double m_phi, double lambda,
                                               double entropy_gap, int k) {
    if (!(mu_phi > 0.0 && mu_phi < 1.0) || !(m_phi > 0.0 && m_phi < 1.0))
        throw validation_error("entropy_deviation_check: need mu_phi, m_phi in (0,1)");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw validation_error("entropy_deviation_check: need lambda in (0,1)");
    if (!(entropy_gap >= 0.0)) throw validation_error("entropy_deviation_check: need entropy_gap >= 0");
    if (k < 1) throw validation_error("entropy_deviation_check: need k >= 1");

    DeviationReport rep;
    if (mu_phi == m_phi) {
        rep.lhs_defined = false;
        rep.consistent = true;
        rep.clause = "none";
        rep.rhs = entropy_gap / (-std::log(lambda));
        return rep;
    }
    const double theta = detail::pow_int(lambda, k);
    double target;
    if (mu_phi > m_phi) {
        rep.clause = "a";
        if (!(theta * (1.0 - m_phi) < mu_phi - m_phi))
            throw validation_error(
                "entropy_deviation_check: k infeasible, need lambda^k strictly below (mu_phi - m_phi)/(1 - m_phi)");
        target = theta + (1.0 - theta) * m_phi;
    } else {
        rep.clause = "b";
        if (!(theta * m_phi < m_phi - mu_phi))
            throw validation_error(
                "entropy_deviation_check: k infeasible, need lambda^k strictly below (m_phi - mu_phi)/m_phi");
        target = (1.0 - theta) * m_phi;
    }
    rep.lhs = kl_div(mu_phi, target) / (-std::log(theta));
    rep.rhs = entropy_gap / (-std::log(lambda));
    rep.consistent = rep.lhs <= rep.rhs;
    return rep;
}

struct RigidityQuery {
    double lambda = 0.5;
    double entropy_gap = 0.0; // D = h_m - h_mu, >= 0
    int k_max = 1;
    std::optional<double> epsilon;
};

struct RigidityReport {
    double bound = 0.0;
    double theta_used = 0.0;
    std::string branch; // "pinsker_grid" | "corollary_rule"
    double grid_bound = 0.0;
    int grid_k = 0;
    std::optional<double> corollary_bound;
    std::optional<double> corollary_theta;
    std::optional<double> c_epsilon;
};

namespace detail {

// sup over r in (0,1] of (-log r) r^eps, located numerically on a log grid
// with golden-section refinement.
inline double rigidity_sup_constant(double eps) {
    auto f = [eps](double logr) { return -logr * std::exp(eps * logr); };
    double best_x = -1.0, best = f(-1.0);
    const int grid = 20000;
    const double lo = -60.0, hi = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / grid;
        const double v = f(x);
        if (v > best) best = v, best_x = x;
    }
    double a = best_x - (hi - lo) / grid, b = best_x + (hi - lo) / grid;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (f(c) > f(d))
            b = d;
        else
            a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return std::max(best, f(0.5 * (a + b)));
}

} // namespace detail

// Closeness bound on |mu(phi) - m(phi)| from an entropy gap D: the Pinsker
// term sqrt(D/(-2 log lambda)) sqrt(-log theta) plus theta, minimized either
// over the full theta = lambda^k grid or by the closed selection rule
// (theta = lambda when sqrt(D) > lambda, else theta = lambda^{k+1} with
// lambda^{k+1} <= sqrt(D) <= lambda^k).
inline RigidityReport rigidity_bound(const RigidityQuery& q) {
    if (!(q.lambda > 0.0 && q.lambda < 1.0))
        throw validation_error("rigidity_bound: need lambda in (0,1)");
    if (!(q.entropy_gap >= 0.0) || std::isinf(q.entropy_gap))
        throw validation_error("rigidity_bound: need finite entropy_gap >= 0");
    if (q.k_max < 1) throw validation_error("rigidity_bound: need k_max >= 1");
    if (q.epsilon && !(*q.epsilon > 0.0))
        throw validation_error("rigidity_bound: need epsilon > 0");

    const double D = q.entropy_gap;
    const double pinsker_coef = std::sqrt(D / (-2.0 * std::log(q.lambda)));

    RigidityReport rep;
    double grid_best = std::numeric_limits<double>::infinity();
    int grid_k = 1;
    double grid_theta = q.lambda;
    for (int k = 1; k <= q.k_max; ++k) {
        const double theta = detail::pow_int(q.lambda, k);
        const double val = pinsker_coef * std::sqrt(-std::log(theta)) + theta;
        if (val < grid_best) {
            grid_best = val;
            grid_k = k;
            grid_theta = theta;
        }
    }
    rep.grid_bound = grid_best;
    rep.grid_k = grid_k;

    const double sqrtD = std::sqrt(D);
    if (sqrtD > 0.0) {
        double theta;
        if (sqrtD > q.lambda) {
            theta = q.lambda;
        } else {
            int k = static_cast<int>(std::floor(std::log(sqrtD) / std::log(q.lambda)));
            if (k < 1) k = 1;
            while (detail::pow_int(q.lambda, k) > sqrtD) ++k;   // lambda^k <= sqrt(D)
            while (k > 1 && detail::pow_int(q.lambda, k - 1) <= sqrtD) --k;
            theta = detail::pow_int(q.lambda, k); // theta = lambda^{k+1} in the rule's indexing
        }
        rep.corollary_theta = theta;
        rep.corollary_bound = pinsker_coef * std::sqrt(-std::log(theta)) + theta;
    }

    if (rep.corollary_bound && *rep.corollary_bound < rep.grid_bound) {
        rep.bound = *rep.corollary_bound;
        rep.theta_used = *rep.corollary_theta;
        rep.branch = "corollary_rule";
    } else {
        rep.bound = rep.grid_bound;
        rep.theta_used = grid_theta;
        rep.branch = "pinsker_grid";
    }
    if (q.epsilon) {
        const double cp = detail::rigidity_sup_constant(*q.epsilon);
        rep.c_epsilon = std::max(std::sqrt(cp) / 2.0, 1.0);
    }
    return rep;
}

// Mass bound for the complement of a closed set F with stationary mass m_F:
// 1 - mu(F) <= [log theta / log(theta + (1-theta)(1-m_F))] *
//              [gap/(-log lambda) + 1/(-log theta)] + theta + (1-theta)(1-m_F).
inline double bigset_mass_bound(double lambda, int k, double m_F, double entropy_gap) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw validation_error("bigset_mass_bound: need lambda in (0,1)");
    if (k < 1) throw validation_error("bigset_mass_bound: need k >= 1");
    if (!(m_F > 0.0 && m_F < 1.0))
        throw validation_error("bigset_mass_bound: need m_F strictly inside (0,1)");
    if (!(entropy_gap >= 0.0)) throw validation_error("bigset_mass_bound: need entropy_gap >= 0");
    const double theta = detail::pow_int(lambda, k);
    const double blended = theta + (1.0 - theta) * (1.0 - m_F);
    return (std::log(theta) / std::log(blended)) *
               (entropy_gap / (-std::log(lambda)) + 1.0 / (-std::log(theta))) +
           blended;
}

// Mass retention from an entropy gap: max(0, 1 - (h_m - h)/(-log lambda)).
inline double nonescape_from_lambda(double h_m, double h, double lambda) {
    if (std::isnan(h_m) || std::isnan(h)) throw validation_error("nonescape_from_lambda: NaN input");
    if (!(h <= h_m)) throw validation_error("nonescape_from_lambda: need h <= h_m");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw validation_error("nonescape_from_lambda: need lambda in (0,1)");
    return std::max(0.0, 1.0 - (h_m - h) / (-std::log(lambda)));
}

} // namespace specgap
