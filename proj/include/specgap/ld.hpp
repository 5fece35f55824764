#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "specgap/chain.hpp"
#include "specgap/common.hpp"

namespace specgap {

// Binary Kullback-Leibler divergence D(a||b) in nats.
// Conventions: 0 log 0 = 0; +infinity when a>0,b=0 or a<1,b=1.
inline double kl_div(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) throw validation_error("kl_div: NaN input");
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
        throw validation_error("kl_div: arguments must lie in [0, 1]");
    if ((a > 0.0 && b == 0.0) || (a < 1.0 && b == 1.0))
        return std::numeric_limits<double>::infinity();
    double t = 0.0;
    if (a > 0.0) t += a * std::log(a / b);
    if (a < 1.0) t += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    return t < 0.0 ? 0.0 : t;
}

// Maximizer of r*eta - log(1 + beta(e^r - 1)); the supremum equals
// kl_div(eta, beta).
inline double optimal_tilt(double eta, double beta) {
    if (std::isnan(eta) || std::isnan(beta)) throw validation_error("optimal_tilt: NaN input");
    if (!(beta > 0.0 && beta < 1.0 && eta < 1.0))
        throw validation_error("optimal_tilt: need 0 < beta < eta < 1");
    if (!(eta > beta)) throw validation_error("optimal_tilt: eta <= beta has no positive tilt");
    return std::log(eta * (1.0 - beta) / (beta * (1.0 - eta)));
}

// Norm bound for the tilted compressed operator: 1 + beta(e^r - 1) with
// beta = lambda + (1 - lambda) m_phi.
inline double tilted_norm_bound(double r, double m_phi, double lambda) {
    if (!(r >= 0.0)) throw validation_error("tilted_norm_bound: need r >= 0");
    if (!(m_phi >= 0.0 && m_phi <= 1.0))
        throw validation_error("tilted_norm_bound: need m_phi in [0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw validation_error("tilted_norm_bound: need lambda in [0, 1]");
    const double beta = lambda + (1.0 - lambda) * m_phi;
    return 1.0 + beta * std::expm1(r);
}

struct MgfResult {
    double value;          // exp(log_path); +inf if it overflows
    double log_path;       // log of the transfer-matrix path sum
    double log_compressed; // log of the compressed inner product
};

// Moment generating function of the occupation sum: E_m exp(r sum phi).
// Computed along two routes that agree only under the semigroup certificate:
// (i) a transfer-matrix product over chain paths, (ii) the compressed
// inner product <e^{r phi/2}, (E T E)^{n-1} e^{r phi/2}> on X.
// Both run in log space so long horizons cannot overflow intermediate terms.
inline MgfResult exact_mgf_detail(const Chaind& c, const Projection& pi, const Vecd& phi,
                                  double r, long n) {
    if (n < 1) throw validation_error("exact_mgf: need n >= 1");
    if (!c.has_measure()) throw validation_error("exact_mgf: stationary measure not set");
    validate_projection(c, pi);
    if (phi.size() != pi.atoms())
        throw validation_error("exact_mgf: observable length does not match state space");
    if (n >= 2) {
        MCertificate cert = check_property_m(c, pi, n);
        if (cert.first_violation)
            throw certificate_error("exact_mgf: semigroup certificate fails at depth " +
                                    std::to_string(cert.first_violation->n) + " (gap " +
                                    std::to_string(cert.first_violation->gap) + ")");
    }

    const Eigen::Index ns = c.size();
    Vecd g(ns);
    for (Eigen::Index i = 0; i < ns; ++i)
        g(i) = std::exp(r * phi(pi.map[static_cast<std::size_t>(i)]));

    // Route (i): m^T G (P G)^{n-1} 1, renormalized each step.
    double log_path = 0.0;
    {
        Vecd w = Vecd::Ones(ns);
        for (long t = 1; t < n; ++t) {
            w = c.P * g.cwiseProduct(w).matrix();
            const double s = w.sum();
            log_path += std::log(s);
            w /= s;
        }
        log_path += std::log(c.m.dot(g.cwiseProduct(w)));
    }

    // Route (ii): compressed inner product under mX.
    AveragingOp<double> op = averaging_operator(c, pi);
    double log_comp = 0.0;
    {
        Vecd e_half = ((0.5 * r) * phi.array()).exp().matrix();
        Vecd w = e_half;
        for (long t = 1; t < n; ++t) {
            w = e_half.cwiseProduct(op.T * e_half.cwiseProduct(w).matrix());
            const double s = w.sum();
            log_comp += std::log(s);
            w /= s;
        }
        log_comp += std::log(op.mX.dot(e_half.cwiseProduct(w)));
    }

    if (std::fabs(log_path - log_comp) > 1e-10 * std::max(1.0, std::fabs(log_path)))
        throw certificate_error("exact_mgf: transfer-matrix and compressed routes disagree (" +
                                std::to_string(log_path) + " vs " + std::to_string(log_comp) +
                                " in log)");
    return MgfResult{std::exp(log_path), log_path, log_comp};
}

inline double exact_mgf(const Chaind& c, const Projection& pi, const Vecd& phi, double r,
                        long n) {
    return exact_mgf_detail(c, pi, phi, r, n).value;
}

enum class Tail { upper, lower };

struct LDQuery {
    double eta = 0.0;
    double m_phi = 0.0;
    double lambda = 0.0;
    long n = 1;
    Tail tail = Tail::upper;
    std::optional<int> k;
};

// clause: "a" (upper tail), "b" (lower tail), or "ld_simple" (the direct
// Chernoff-regime bound with target beta = lambda + (1-lambda) m_phi).
// Invariant: bound == prefactor * exp(-n * rate) exactly as composed here.
// prefactor_loose carries the unsharpened k * exp(D(eta || m_phi)) variant
// for comparison; prefactor <= prefactor_loose always.
struct LDReport {
    double bound = 0.0;
    double rate = 0.0;
    int k_used = 0;
    double theta = 0.0;
    double prefactor = 0.0;
    std::string clause;
    bool vacuous = false;
    double prefactor_loose = 0.0;
};

namespace detail {

inline double pow_int(double x, int k) {
    double acc = 1.0;
    while (k > 0) {
        if (k & 1) acc *= x;
        k >>= 1;
        if (k > 0) x *= x;
    }
    return acc;
}

inline void validate_ld_query(const LDQuery& q) {
    if (std::isnan(q.eta) || std::isnan(q.m_phi) || std::isnan(q.lambda))
        throw validation_error("ld_query: NaN input");
    if (!(q.eta >= 0.0 && q.eta <= 1.0)) throw validation_error("ld_query: need eta in [0, 1]");
    if (!(q.m_phi >= 0.0 && q.m_phi <= 1.0))
        throw validation_error("ld_query: need m_phi in [0, 1]");
    if (!(q.lambda >= 0.0 && q.lambda <= 1.0))
        throw validation_error("ld_query: need lambda in [0, 1]");
    if (q.n < 1) throw validation_error("ld_query: need n >= 1");
    if (q.tail == Tail::upper && !(q.eta >= q.m_phi))
        throw validation_error("ld_query: upper tail requires eta >= m_phi");
    if (q.tail == Tail::lower && !(q.eta <= q.m_phi))
        throw validation_error("ld_query: lower tail requires eta <= m_phi");
    if (q.k && *q.k < 1) throw validation_error("ld_query: need k >= 1");
}

// Feasibility in multiplied-out form (no division, exact at boundaries):
// upper: theta (1 - m) <= eta - m;  lower: theta m <= m - eta.
inline bool k_feasible(const LDQuery& q, double theta) {
    if (q.tail == Tail::upper) return theta * (1.0 - q.m_phi) <= q.eta - q.m_phi;
    return theta * q.m_phi <= q.m_phi - q.eta;
}

inline std::string feasibility_text(const LDQuery& q, int k, double theta) {
    if (q.tail == Tail::upper)
        return "k=" + std::to_string(k) + " infeasible: need lambda^k*(1-m_phi) <= eta-m_phi, got " +
               std::to_string(theta * (1.0 - q.m_phi)) + " > " + std::to_string(q.eta - q.m_phi);
    return "k=" + std::to_string(k) + " infeasible: need lambda^k*m_phi <= m_phi-eta, got " +
           std::to_string(theta * q.m_phi) + " > " + std::to_string(q.m_phi - q.eta);
}

} // namespace detail

// Occupation-time tail bound at a fixed exponentiation level k, theta =
// lambda^k. Upper tail (clause a): bound = k exp[-n(1/k - 1/n) D(eta ||
// theta + (1-theta) m_phi)]; lower tail (clause b) replaces the target by
// (1-theta) m_phi.
inline LDReport ld_tail_bound(const LDQuery& q) {
    detail::validate_ld_query(q);
    if (!q.k) throw validation_error("ld_tail_bound: k must be set");
    const int k = *q.k;
    const double theta = (q.lambda == 0.0) ? 0.0 : detail::pow_int(q.lambda, k);
    if (!detail::k_feasible(q, theta))
        throw validation_error("ld_tail_bound: " + detail::feasibility_text(q, k, theta));
    const double target = (q.tail == Tail::upper) ? theta + (1.0 - theta) * q.m_phi
                                                  : (1.0 - theta) * q.m_phi;
    const double D = kl_div(q.eta, target);
    LDReport rep;
    rep.rate = D / static_cast<double>(k);
    rep.k_used = k;
    rep.theta = theta;
    rep.prefactor = static_cast<double>(k) * std::exp(D);
    rep.bound = rep.prefactor * std::exp(-static_cast<double>(q.n) * rep.rate);
    rep.clause = (q.tail == Tail::upper) ? "a" : "b";
    rep.vacuous = !(rep.bound <= 1.0);
    rep.prefactor_loose = static_cast<double>(k) * std::exp(kl_div(q.eta, q.m_phi));
    return rep;
}

// Scans k = 1..k_max and returns the smallest bound, ties toward smaller k.
inline LDReport ld_tail_optimize(const LDQuery& q, int k_max) {
    detail::validate_ld_query(q);
    if (q.k) throw validation_error("ld_tail_optimize: k must be unset");
    if (k_max < 1) throw validation_error("ld_tail_optimize: need k_max >= 1");
    std::optional<LDReport> best;
    for (int k = 1; k <= k_max; ++k) {
        LDQuery qk = q;
        qk.k = k;
        const double theta = (q.lambda == 0.0) ? 0.0 : detail::pow_int(q.lambda, k);
        if (!detail::k_feasible(q, theta)) continue;
        LDReport rep = ld_tail_bound(qk);
        if (!best || rep.bound < best->bound) best = rep;
    }
    if (best) return *best;

    // No feasible k: name the smallest k that would work, if any.
    const double threshold = (q.tail == Tail::upper)
                                 ? (q.m_phi < 1.0 ? (q.eta - q.m_phi) / (1.0 - q.m_phi) : 1.0)
                                 : (q.m_phi > 0.0 ? (q.m_phi - q.eta) / q.m_phi : 1.0);
    if (q.lambda > 0.0 && q.lambda < 1.0 && threshold > 0.0) {
        const double x = std::log(threshold) / std::log(q.lambda);
        if (x < 2e9) {
            int k_min = static_cast<int>(std::ceil(x));
            if (k_min < 1) k_min = 1;
            while (!detail::k_feasible(q, detail::pow_int(q.lambda, k_min))) ++k_min;
            while (k_min > 1 && detail::k_feasible(q, detail::pow_int(q.lambda, k_min - 1)))
                --k_min;
            throw validation_error("ld_tail_optimize: no feasible k <= " + std::to_string(k_max) +
                                   "; smallest feasible k is " + std::to_string(k_min));
        }
    }
    throw validation_error("ld_tail_optimize: no feasible k exists for this query");
}

// Direct Chernoff-regime bound exp(-n D(eta || beta)) with beta = lambda +
// (1-lambda) m_phi, valid when the threshold clears beta itself (upper:
// eta >= beta; lower: eta <= (1-lambda) m_phi). Sharper than any k-level
// split when applicable; at lambda = 0 it is the full-strength i.i.d.
// Chernoff-Hoeffding bound.
inline LDReport ld_simple_bound(const LDQuery& q) {
    detail::validate_ld_query(q);
    const double beta = (q.tail == Tail::upper)
                            ? q.lambda + (1.0 - q.lambda) * q.m_phi
                            : (1.0 - q.lambda) * q.m_phi;
    if (q.tail == Tail::upper && !(q.eta >= beta))
        throw validation_error("ld_simple_bound: requires eta >= lambda + (1-lambda)*m_phi = " +
                               std::to_string(beta));
    if (q.tail == Tail::lower && !(q.eta <= beta))
        throw validation_error("ld_simple_bound: requires eta <= (1-lambda)*m_phi = " +
                               std::to_string(beta));
    LDReport rep;
    rep.rate = kl_div(q.eta, beta);
    rep.k_used = 1;
    rep.theta = q.lambda;
    rep.prefactor = 1.0;
    rep.bound = rep.prefactor * std::exp(-static_cast<double>(q.n) * rep.rate);
    rep.clause = "ld_simple";
    rep.vacuous = !(rep.bound <= 1.0);
    rep.prefactor_loose = 1.0;
    return rep;
}

} // namespace specgap
