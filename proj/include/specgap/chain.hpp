#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "specgap/common.hpp"
#include "specgap/rational.hpp"

namespace specgap {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Matd = Mat<double>;
using Vecd = Vec<double>;
using MatQ = Mat<Rat>;
using VecQ = Vec<Rat>;

inline double to_double(double x) { return x; }
inline double to_double(const Rat& x) { return x.to_double(); }

template <class S>
constexpr bool is_exact_scalar = std::is_same_v<S, Rat>;

// Finite Markov chain on labelled states. `m` is the stationary measure,
// empty until computed or supplied.
template <class S>
struct Chain {
    std::vector<std::string> labels;
    Mat<S> P;
    Vec<S> m;

    Eigen::Index size() const { return P.rows(); }
    bool has_measure() const { return m.size() == P.rows() && m.size() > 0; }
};

using Chaind = Chain<double>;
using ChainQ = Chain<Rat>;

// Surjective map from chain states onto a coarser state space X.
struct Projection {
    std::vector<Eigen::Index> map; // state index -> atom index
    std::vector<std::string> x_labels;

    Eigen::Index atoms() const { return static_cast<Eigen::Index>(x_labels.size()); }
};

inline Projection identity_projection(const std::vector<std::string>& labels) {
    Projection pi;
    pi.map.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) pi.map[i] = static_cast<Eigen::Index>(i);
    pi.x_labels = labels;
    return pi;
}

inline std::vector<std::string> default_labels(Eigen::Index n) {
    std::vector<std::string> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::to_string(i);
    return out;
}

// Markov operator compressed to X: T = D^{-1} C^T diag(m) P C with
// C the atom indicator matrix and D = diag(mX).
template <class S>
struct AveragingOp {
    Mat<S> T;
    Vec<S> mX;
    std::vector<std::string> x_labels;
};

namespace detail {

template <class S>
bool within(const S& x, double tol) {
    if constexpr (is_exact_scalar<S>) {
        (void)tol;
        return x == S(0);
    } else {
        return std::fabs(x) <= tol;
    }
}

// Strongly connected components, iterative Kosaraju. Returns component id
// per state, ids in reverse topological order of the condensation.
inline std::vector<int> scc_components(const std::vector<std::vector<Eigen::Index>>& adj,
                                       int& n_comps) {
    const Eigen::Index n = static_cast<Eigen::Index>(adj.size());
    std::vector<std::vector<Eigen::Index>> radj(static_cast<std::size_t>(n));
    for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v : adj[static_cast<std::size_t>(u)])
            radj[static_cast<std::size_t>(v)].push_back(u);

    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index s = 0; s < n; ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        // Explicit stack of (node, next-edge-cursor).
        std::vector<std::pair<Eigen::Index, std::size_t>> stack{{s, 0}};
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            auto& [u, cursor] = stack.back();
            const auto& out = adj[static_cast<std::size_t>(u)];
            if (cursor < out.size()) {
                Eigen::Index v = out[cursor++];
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.emplace_back(v, 0);
                }
            } else {
                order.push_back(u);
                stack.pop_back();
            }
        }
    }

    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    n_comps = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[static_cast<std::size_t>(*it)] != -1) continue;
        std::vector<Eigen::Index> stack{*it};
        comp[static_cast<std::size_t>(*it)] = n_comps;
        while (!stack.empty()) {
            Eigen::Index u = stack.back();
            stack.pop_back();
            for (Eigen::Index v : radj[static_cast<std::size_t>(u)]) {
                if (comp[static_cast<std::size_t>(v)] == -1) {
                    comp[static_cast<std::size_t>(v)] = n_comps;
                    stack.push_back(v);
                }
            }
        }
        ++n_comps;
    }
    return comp;
}

} // namespace detail

template <class S>
void validate_chain(const Chain<S>& c) {
    const Eigen::Index n = c.P.rows();
    if (n == 0) throw validation_error("chain: empty transition matrix");
    if (c.P.cols() != n) throw validation_error("chain: transition matrix must be square");
    if (c.labels.size() != static_cast<std::size_t>(n))
        throw validation_error("chain: label count does not match state count");
    const double row_tol = 1e-12;
    for (Eigen::Index i = 0; i < n; ++i) {
        S row_sum = S(0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (c.P(i, j) < S(0))
                throw validation_error("chain: negative transition probability at row '" +
                                       c.labels[static_cast<std::size_t>(i)] + "'");
            row_sum += c.P(i, j);
        }
        if (!detail::within(row_sum - S(1), row_tol))
            throw validation_error("chain: row '" + c.labels[static_cast<std::size_t>(i)] +
                                   "' does not sum to 1");
    }
}

// Labels of the closed communicating classes (one representative each).
// A unique closed class is exactly the condition for a unique stationary
// measure, so anything else is rejected with the witnesses in the message.
template <class S>
std::vector<std::string> closed_class_witnesses(const Chain<S>& c) {
    const Eigen::Index n = c.size();
    std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (c.P(i, j) > S(0)) adj[static_cast<std::size_t>(i)].push_back(j);
    int n_comps = 0;
    std::vector<int> comp = detail::scc_components(adj, n_comps);
    std::vector<char> closed(static_cast<std::size_t>(n_comps), 1);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j : adj[static_cast<std::size_t>(i)])
            if (comp[static_cast<std::size_t>(i)] != comp[static_cast<std::size_t>(j)])
                closed[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = 0;
    std::vector<std::string> witnesses;
    std::vector<char> reported(static_cast<std::size_t>(n_comps), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int cid = comp[static_cast<std::size_t>(i)];
        if (closed[static_cast<std::size_t>(cid)] && !reported[static_cast<std::size_t>(cid)]) {
            reported[static_cast<std::size_t>(cid)] = 1;
            witnesses.push_back(c.labels[static_cast<std::size_t>(i)]);
        }
    }
    return witnesses;
}

namespace detail {

inline Vecd stationary_direct(const Matd& P) {
    const Eigen::Index n = P.rows();
    Matd A = P.transpose() - Matd::Identity(n, n);
    A.row(n - 1).setOnes();
    Vecd rhs = Vecd::Zero(n);
    rhs(n - 1) = 1.0;
    return A.partialPivLu().solve(rhs);
}

// Power iteration with periodic Aitken delta-squared extrapolation.
inline Vecd stationary_power(const Matd& P) {
    const Eigen::Index n = P.rows();
    const Matd Pt = P.transpose();
    Vecd v = Vecd::Constant(n, 1.0 / static_cast<double>(n));
    Vecd u0 = v, u1 = v;
    for (long it = 0; it < 200000; ++it) {
        Vecd w = Pt * v;
        w /= w.sum();
        if ((Pt * w - w).lpNorm<Eigen::Infinity>() < 1e-13) return w;
        if (it % 16 == 15) {
            // Componentwise Aitken on three consecutive iterates.
            Vecd acc = w;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d1 = w(i) - u1(i);
                const double d0 = u1(i) - u0(i);
                const double den = d1 - d0;
                if (std::fabs(den) > 1e-300) acc(i) = w(i) - d1 * d1 / den;
            }
            if ((acc.array() >= 0.0).all()) {
                const double s = acc.sum();
                if (s > 0.0) {
                    acc /= s;
                    if ((Pt * acc - acc).lpNorm<Eigen::Infinity>() <
                        (Pt * w - w).lpNorm<Eigen::Infinity>())
                        w = acc;
                }
            }
        }
        u0 = u1;
        u1 = w;
        v = std::move(w);
    }
    throw certificate_error("stationary_measure: power iteration did not converge");
}

} // namespace detail

inline VecQ stationary_measure(const ChainQ& c) {
    validate_chain(c);
    auto witnesses = closed_class_witnesses(c);
    if (witnesses.size() != 1) {
        std::string msg = "stationary_measure: chain has " + std::to_string(witnesses.size()) +
                          " closed classes (representatives:";
        for (const auto& w : witnesses) msg += " '" + w + "'";
        throw validation_error(msg + ")");
    }
    const Eigen::Index n = c.size();
    MatQ A = MatQ(c.P.transpose()) - MatQ::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j) A(n - 1, j) = Rat(1);
    VecQ rhs = VecQ::Zero(n);
    rhs(n - 1) = Rat(1);
    VecQ m = A.fullPivLu().solve(rhs);
    VecQ residual = VecQ(c.P.transpose() * m) - m;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (m(i) < Rat(0)) throw certificate_error("stationary_measure: negative exact solution");
        if (residual(i) != Rat(0))
            throw certificate_error("stationary_measure: exact solve left nonzero residual");
    }
    return m;
}

inline Vecd stationary_measure(const Chaind& c) {
    validate_chain(c);
    auto witnesses = closed_class_witnesses(c);
    if (witnesses.size() != 1) {
        std::string msg = "stationary_measure: chain has " + std::to_string(witnesses.size()) +
                          " closed classes (representatives:";
        for (const auto& w : witnesses) msg += " '" + w + "'";
        throw validation_error(msg + ")");
    }
    const Eigen::Index n = c.size();
    Vecd m = (n <= 2000) ? detail::stationary_direct(c.P) : detail::stationary_power(c.P);
    // Direct solves can leave signed noise around zero entries.
    for (Eigen::Index i = 0; i < n; ++i) {
        if (m(i) < 0.0) {
            if (m(i) < -1e-12) throw certificate_error("stationary_measure: negative component");
            m(i) = 0.0;
        }
    }
    m /= m.sum();
    const double residual = (c.P.transpose() * m - m).lpNorm<Eigen::Infinity>();
    if (!(residual < 1e-12))
        throw certificate_error("stationary_measure: residual " + std::to_string(residual));
    return m;
}

template <class S>
Chain<S> with_stationary_measure(Chain<S> c) {
    c.m = stationary_measure(c);
    return c;
}

template <class S>
void validate_projection(const Chain<S>& c, const Projection& pi) {
    const Eigen::Index n = c.size();
    const Eigen::Index k = pi.atoms();
    if (k == 0) throw validation_error("projection: empty target space");
    if (pi.map.size() != static_cast<std::size_t>(n))
        throw validation_error("projection: map length does not match state count");
    std::vector<char> hit(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index x = pi.map[static_cast<std::size_t>(i)];
        if (x < 0 || x >= k) throw validation_error("projection: map value out of range");
        hit[static_cast<std::size_t>(x)] = 1;
    }
    for (Eigen::Index x = 0; x < k; ++x)
        if (!hit[static_cast<std::size_t>(x)])
            throw validation_error("projection: atom '" + pi.x_labels[static_cast<std::size_t>(x)] +
                                   "' has no states");
}

namespace detail {

// Compress an n-step kernel onto X under the stationary measure.
template <class S>
Mat<S> compress_kernel(const Mat<S>& Pn, const Vec<S>& m, const Projection& pi, Vec<S>& mX) {
    const Eigen::Index n = Pn.rows();
    const Eigen::Index k = pi.atoms();
    mX = Vec<S>::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) mX(pi.map[static_cast<std::size_t>(i)]) += m(i);
    Mat<S> T = Mat<S>::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index x = pi.map[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j)
            T(x, pi.map[static_cast<std::size_t>(j)]) += m(i) * Pn(i, j);
    }
    for (Eigen::Index x = 0; x < k; ++x) {
        if (mX(x) == S(0))
            throw validation_error("projection: atom '" + pi.x_labels[static_cast<std::size_t>(x)] +
                                   "' has zero stationary mass");
        for (Eigen::Index y = 0; y < k; ++y) T(x, y) /= mX(x);
    }
    return T;
}

} // namespace detail

template <class S>
Mat<S> matrix_power(Mat<S> base, long n) {
    if (n < 0) throw validation_error("matrix_power: negative exponent");
    Mat<S> acc = Mat<S>::Identity(base.rows(), base.cols());
    while (n > 0) {
        if (n & 1) acc = Mat<S>(acc * base);
        n >>= 1;
        if (n > 0) base = Mat<S>(base * base);
    }
    return acc;
}

template <class S>
AveragingOp<S> averaging_operator(const Chain<S>& c, const Projection& pi) {
    if (!c.has_measure()) throw validation_error("averaging_operator: stationary measure not set");
    validate_projection(c, pi);
    AveragingOp<S> op;
    op.x_labels = pi.x_labels;
    op.T = detail::compress_kernel(c.P, c.m, pi, op.mX);
    return op;
}

// Compression of the n-step kernel. Equals the n-th power of the one-step
// compression exactly when the projection is Markov-compatible.
template <class S>
AveragingOp<S> n_step_operator(const Chain<S>& c, const Projection& pi, long n) {
    if (n < 0) throw validation_error("n_step_operator: need n >= 0");
    if (n > 1000000) throw validation_error("n_step_operator: n exceeds 1e6");
    if (!c.has_measure()) throw validation_error("n_step_operator: stationary measure not set");
    validate_projection(c, pi);
    AveragingOp<S> op;
    op.x_labels = pi.x_labels;
    Mat<S> Pn = matrix_power<S>(c.P, n);
    op.T = detail::compress_kernel(Pn, c.m, pi, op.mX);
    return op;
}

struct MViolation {
    long n;
    double gap;
};

struct MCertificate {
    long holds_up_to;
    std::optional<MViolation> first_violation;
};

// Checks the semigroup identity: the compression of the n-step kernel must
// equal the n-th power of the one-step compression, for n = 2..n_max.
// With exact scalars any nonzero gap is a violation; tol applies to double.
template <class S>
MCertificate check_property_m(const Chain<S>& c, const Projection& pi, long n_max,
                              double tol = 1e-10) {
    if (n_max < 2) throw validation_error("check_property_m: need n_max >= 2");
    AveragingOp<S> op = averaging_operator(c, pi);
    Mat<S> Pn = c.P;
    Mat<S> Tpow = op.T;
    Vec<S> mX_scratch;
    MCertificate cert{1, std::nullopt};
    for (long n = 2; n <= n_max; ++n) {
        Pn = Mat<S>(Pn * c.P);
        Tpow = Mat<S>(Tpow * op.T);
        Mat<S> Tn = detail::compress_kernel(Pn, c.m, pi, mX_scratch);
        S gap = S(0);
        for (Eigen::Index x = 0; x < Tn.rows(); ++x)
            for (Eigen::Index y = 0; y < Tn.cols(); ++y) {
                S d = abs(Tn(x, y) - Tpow(x, y));
                if (d > gap) gap = d;
            }
        const bool violated = is_exact_scalar<S> ? (gap != S(0)) : (to_double(gap) > tol);
        if (violated) {
            cert.first_violation = MViolation{n, to_double(gap)};
            return cert;
        }
        cert.holds_up_to = n;
    }
    return cert;
}

// Shannon entropy rate of the chain in nats: -sum_i m_i sum_j P_ij log P_ij.
inline double entropy_rate(const Chaind& c) {
    if (!c.has_measure()) throw validation_error("entropy_rate: stationary measure not set");
    double h = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            const double p = c.P(i, j);
            if (p > 0.0) h -= c.m(i) * p * std::log(p);
        }
    return h;
}

// n-block collision entropy per step: -(1/n) log P(two independent
// stationary paths of length n coincide). Computed in log space so long
// blocks cannot underflow.
inline double collision_entropy_rate(const Chaind& c, long n) {
    if (n < 1) throw validation_error("collision_entropy_rate: need n >= 1");
    if (!c.has_measure()) throw validation_error("collision_entropy_rate: stationary measure not set");
    const Matd Qt = c.P.cwiseProduct(c.P).transpose();
    Vecd v = c.m.cwiseProduct(c.m);
    double s = v.sum();
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    double acc = std::log(s);
    v /= s;
    for (long t = 1; t < n; ++t) {
        v = Qt * v;
        s = v.sum();
        if (s <= 0.0) return std::numeric_limits<double>::infinity();
        acc += std::log(s);
        v /= s;
    }
    return -acc / static_cast<double>(n);
}

// Mean of an observable on X under the compressed stationary measure.
template <class S>
S observable_mean(const AveragingOp<S>& op, const Vec<S>& phi) {
    if (phi.size() != op.mX.size())
        throw validation_error("observable_mean: observable length does not match state space");
    return op.mX.dot(phi);
}

} // namespace specgap
