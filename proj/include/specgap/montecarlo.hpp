#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specgap/chain.hpp"
#include "specgap/common.hpp"
#include "specgap/ld.hpp"
#include "specgap/rng.hpp"
#include "specgap/spectral.hpp"
#include "specgap/stats.hpp"

namespace specgap {

struct SimConfig {
    long n = 1;
    double eta = 0.0;
    long long samples = 1;
    std::uint64_t seed = 0;
    std::optional<Eigen::Index> start; // empty: stationary start
};

struct TailEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    long long hits = 0;
    long long samples = 0;
};

// Shortest round-trip decimal form; used for CSV cells so reruns are
// byte-identical.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace detail {

inline Eigen::Index inverse_cdf(const Vecd& cumulative, double u) {
    const Eigen::Index n = cumulative.size();
    for (Eigen::Index i = 0; i < n; ++i)
        if (u < cumulative(i)) return i;
    return n - 1;
}

inline Eigen::Index inverse_cdf_row(const Matd& cumulative, Eigen::Index row, double u) {
    const Eigen::Index n = cumulative.cols();
    for (Eigen::Index j = 0; j < n; ++j)
        if (u < cumulative(row, j)) return j;
    return n - 1;
}

inline Matd cumulative_rows(const Matd& P) {
    Matd C = P;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 1; j < P.cols(); ++j) C(i, j) += C(i, j - 1);
    return C;
}

} // namespace detail

// Inverse-CDF sampling; draw t of sample `index` is a pure function of
// (seed, index, t), so paths are reproducible under any evaluation order.
// Draw 0 picks the stationary start (fixed starts consume no draw); draws
// 1..n-1 pick the transitions.
inline std::vector<Eigen::Index> sample_path(const Chaind& c, const SimConfig& cfg, long length,
                                             std::uint64_t index) {
    if (length < 1) throw validation_error("sample_path: need length >= 1");
    if (!cfg.start && !c.has_measure())
        throw validation_error("sample_path: stationary start requires the stationary measure");
    if (cfg.start && (*cfg.start < 0 || *cfg.start >= c.size()))
        throw validation_error("sample_path: start state out of range");
    const Matd cum = detail::cumulative_rows(c.P);
    Vecd cum_m;
    if (!cfg.start) {
        cum_m = c.m;
        for (Eigen::Index i = 1; i < cum_m.size(); ++i) cum_m(i) += cum_m(i - 1);
    }
    std::vector<Eigen::Index> path(static_cast<std::size_t>(length));
    Eigen::Index s = cfg.start ? *cfg.start
                               : detail::inverse_cdf(cum_m, draw_unit(cfg.seed, index, 0));
    path[0] = s;
    for (long t = 1; t < length; ++t) {
        s = detail::inverse_cdf_row(cum, s, draw_unit(cfg.seed, index, static_cast<std::uint64_t>(t)));
        path[static_cast<std::size_t>(t)] = s;
    }
    return path;
}

// Fraction of sampled paths with (1/n) sum phi >= eta; ties count as hits
// (a 1e-9 slack absorbs the float representation of n*eta).
inline TailEstimate empirical_tail(const Chaind& c, const Projection& pi, const Vecd& phi,
                                   const SimConfig& cfg) {
    if (cfg.n < 1) throw validation_error("empirical_tail: need n >= 1");
    if (cfg.samples < 1) throw validation_error("empirical_tail: need samples >= 1");
    validate_projection(c, pi);
    if (phi.size() != pi.atoms())
        throw validation_error("empirical_tail: observable length does not match state space");
    if (!cfg.start && !c.has_measure())
        throw validation_error("empirical_tail: stationary start requires the stationary measure");

    const Matd cum = detail::cumulative_rows(c.P);
    Vecd cum_m;
    if (!cfg.start) {
        cum_m = c.m;
        for (Eigen::Index i = 1; i < cum_m.size(); ++i) cum_m(i) += cum_m(i - 1);
    }
    Vecd phi_state(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i)
        phi_state(i) = phi(pi.map[static_cast<std::size_t>(i)]);

    const double threshold = static_cast<double>(cfg.n) * cfg.eta - 1e-9;
    long long hits = 0;
    for (long long idx = 0; idx < cfg.samples; ++idx) {
        Eigen::Index s = cfg.start
                             ? *cfg.start
                             : detail::inverse_cdf(cum_m, draw_unit(cfg.seed,
                                                                    static_cast<std::uint64_t>(idx), 0));
        double sum = phi_state(s);
        for (long t = 1; t < cfg.n; ++t) {
            s = detail::inverse_cdf_row(cum, s,
                                        draw_unit(cfg.seed, static_cast<std::uint64_t>(idx),
                                                  static_cast<std::uint64_t>(t)));
            sum += phi_state(s);
        }
        if (sum >= threshold) ++hits;
    }
    TailEstimate est;
    est.hits = hits;
    est.samples = cfg.samples;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(cfg.samples);
    Interval ci = clopper_pearson(hits, cfg.samples, 0.99);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    return est;
}

namespace detail {

struct ScaledPhi {
    bool feasible = false;
    long scale = 0;                 // common denominator L
    std::vector<long> state_value;  // round(phi(pi(i)) * L)
    long max_value = 0;
};

// Recovers phi as p/q with q <= 64 per distinct value; the DP lattice is
// exact only when this succeeds.
inline ScaledPhi scale_phi(const Chaind& c, const Projection& pi, const Vecd& phi) {
    std::vector<double> distinct;
    for (Eigen::Index x = 0; x < phi.size(); ++x) {
        bool found = false;
        for (double v : distinct)
            if (v == phi(x)) {
                found = true;
                break;
            }
        if (!found) distinct.push_back(phi(x));
    }
    ScaledPhi out;
    if (distinct.size() > 32) return out;
    long lcm = 1;
    for (double v : distinct) {
        long q_found = 0;
        for (long q = 1; q <= 64; ++q) {
            const double scaled = v * static_cast<double>(q);
            if (std::fabs(scaled - std::round(scaled)) <= 1e-9 * static_cast<double>(q)) {
                q_found = q;
                break;
            }
        }
        if (q_found == 0) return out;
        lcm = std::lcm(lcm, q_found);
        if (lcm > 10000) return out;
    }
    out.scale = lcm;
    out.state_value.resize(static_cast<std::size_t>(c.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double scaled = phi(pi.map[static_cast<std::size_t>(i)]) * static_cast<double>(lcm);
        const long val = static_cast<long>(std::llround(scaled));
        out.state_value[static_cast<std::size_t>(i)] = val;
        out.max_value = std::max(out.max_value, val);
    }
    out.feasible = true;
    return out;
}

} // namespace detail

// Exact tail P(A_n >= eta) under the stationary chain by dynamic programming
// over the (state, scaled occupation sum) lattice. Returns nothing when the
// lattice would not be exact or would be too large.
inline std::optional<double> exact_tail_dp(const Chaind& c, const Projection& pi, const Vecd& phi,
                                           double eta, long n) {
    if (n < 1) throw validation_error("exact_tail_dp: need n >= 1");
    if (!c.has_measure()) throw validation_error("exact_tail_dp: stationary measure not set");
    validate_projection(c, pi);
    if (phi.size() != pi.atoms())
        throw validation_error("exact_tail_dp: observable length does not match state space");
    if (n * c.size() > 10000000) return std::nullopt;
    detail::ScaledPhi sp = detail::scale_phi(c, pi, phi);
    if (!sp.feasible) return std::nullopt;

    const Eigen::Index ns = c.size();
    const long width = n * sp.max_value + 1;
    if (static_cast<long long>(width) * ns > 20000000LL) return std::nullopt;

    // dist[i * width + s] = P(state_t = i, scaled sum = s)
    std::vector<double> dist(static_cast<std::size_t>(ns * width), 0.0);
    for (Eigen::Index i = 0; i < ns; ++i)
        dist[static_cast<std::size_t>(i * width + sp.state_value[static_cast<std::size_t>(i)])] =
            c.m(i);
    std::vector<double> next(dist.size());
    long reach = sp.max_value; // largest occupied sum so far
    for (long t = 1; t < n; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (Eigen::Index i = 0; i < ns; ++i) {
            const double* row = dist.data() + i * width;
            for (long s = 0; s <= reach; ++s) {
                const double mass = row[s];
                if (mass == 0.0) continue;
                for (Eigen::Index j = 0; j < ns; ++j) {
                    const double pij = c.P(i, j);
                    if (pij == 0.0) continue;
                    next[static_cast<std::size_t>(j * width + s +
                                                  sp.state_value[static_cast<std::size_t>(j)])] +=
                        mass * pij;
                }
            }
        }
        dist.swap(next);
        reach = std::min(reach + sp.max_value, width - 1);
    }

    const double target = static_cast<double>(n) * eta * static_cast<double>(sp.scale);
    long H = static_cast<long>(std::ceil(target - 1e-9 * std::max(1.0, std::fabs(target))));
    if (H < 0) H = 0;
    double tail = 0.0;
    for (Eigen::Index i = 0; i < ns; ++i)
        for (long s = H; s < width; ++s) tail += dist[static_cast<std::size_t>(i * width + s)];
    return std::min(1.0, std::max(0.0, tail));
}

struct CompareRow {
    long n = 0;
    TailEstimate est;
    std::optional<double> exact_dp;
    std::optional<LDReport> bound; // empty when no k is feasible
    double chernoff_rate = 0.0;
};

struct CompareReport {
    double lambda = 0.0;
    double m_phi = 0.0;
    std::vector<CompareRow> rows;
};

// Upper-tail comparison harness: per horizon, the empirical estimate, the
// exact DP tail where the lattice is exact, and the optimized bound. The
// dominance assertions run only for stationary starts; a violated assertion
// is an implementation bug, not a statistical fluke, hence the hard error.
inline CompareReport bound_vs_empirical(const Chaind& c, const Projection& pi, const Vecd& phi,
                                        double eta, const std::vector<long>& n_list,
                                        long long samples, std::uint64_t seed, int k_max = 40) {
    if (n_list.empty()) throw validation_error("bound_vs_empirical: empty n list");
    if (!c.has_measure()) throw validation_error("bound_vs_empirical: stationary measure not set");
    validate_projection(c, pi);

    long n_max = 0;
    for (long n : n_list) {
        if (n < 1) throw validation_error("bound_vs_empirical: need n >= 1");
        n_max = std::max(n_max, n);
    }
    // Semigroup certificate; depth capped to keep the check polynomial.
    const long depth = std::min<long>(n_max, 12);
    if (depth >= 2) {
        MCertificate cert = check_property_m(c, pi, depth);
        if (cert.first_violation)
            throw certificate_error("bound_vs_empirical: semigroup certificate fails at depth " +
                                    std::to_string(cert.first_violation->n));
    }

    AveragingOp<double> op = averaging_operator(c, pi);
    const double m_phi = observable_mean(op, phi);
    if (!(eta >= m_phi))
        throw validation_error("bound_vs_empirical: upper-tail harness needs eta >= m(phi)");
    double lambda = l20_norm(op).lambda;
    lambda = std::min(1.0, std::max(0.0, lambda));

    CompareReport rep;
    rep.lambda = lambda;
    rep.m_phi = m_phi;
    const double chernoff_rate = kl_div(eta, m_phi);

    for (long n : n_list) {
        CompareRow row;
        row.n = n;
        row.chernoff_rate = chernoff_rate;
        SimConfig cfg;
        cfg.n = n;
        cfg.eta = eta;
        cfg.samples = samples;
        cfg.seed = seed;
        row.est = empirical_tail(c, pi, phi, cfg);
        row.exact_dp = exact_tail_dp(c, pi, phi, eta, n);
        LDQuery q;
        q.eta = eta;
        q.m_phi = m_phi;
        q.lambda = lambda;
        q.n = n;
        q.tail = Tail::upper;
        try {
            row.bound = ld_tail_optimize(q, k_max);
        } catch (const validation_error&) {
            row.bound.reset(); // no feasible k: bound cells stay empty
        }
        if (row.bound) {
            if (row.est.ci_low > row.bound->bound)
                throw certificate_error(
                    "bound_vs_empirical: ci_low exceeds the bound at n = " + std::to_string(n) +
                    " (ci_low " + format_double(row.est.ci_low) + ", bound " +
                    format_double(row.bound->bound) + ", p_hat " + format_double(row.est.p_hat) +
                    ", hits " + std::to_string(row.est.hits) + ")");
            if (row.exact_dp && *row.exact_dp > row.bound->bound)
                throw certificate_error(
                    "bound_vs_empirical: exact tail exceeds the bound at n = " + std::to_string(n) +
                    " (exact " + format_double(*row.exact_dp) + ", bound " +
                    format_double(row.bound->bound) + ")");
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline std::string compare_csv(const CompareReport& rep) {
    std::string out = "n,p_hat,ci_low,ci_high,exact_dp,bound,k_used,rate,chernoff_rate\n";
    for (const CompareRow& row : rep.rows) {
        out += std::to_string(row.n);
        out += ',' + format_double(row.est.p_hat);
        out += ',' + format_double(row.est.ci_low);
        out += ',' + format_double(row.est.ci_high);
        out += ',';
        if (row.exact_dp) out += format_double(*row.exact_dp);
        out += ',';
        if (row.bound) out += format_double(row.bound->bound);
        out += ',';
        if (row.bound) out += std::to_string(row.bound->k_used);
        out += ',';
        if (row.bound) out += format_double(row.bound->rate);
        out += ',' + format_double(row.chernoff_rate);
        out += '\n';
    }
    return out;
}

} // namespace specgap
