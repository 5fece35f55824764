#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "specgap/chain.hpp"
#include "specgap/common.hpp"

namespace specgap {

struct SpectralReport {
    double lambda = 0.0;
    std::string method;
    long iterations = 0;
    double residual = 0.0;
    std::optional<double> spectral_radius_l20;
};

enum class NormMethod { automatic, dense, power_iteration };

namespace detail {

inline void require_positive_measure(const Vecd& mX) {
    for (Eigen::Index i = 0; i < mX.size(); ++i)
        if (!(mX(i) > 0.0))
            throw validation_error("spectral: measure has a non-positive entry at index " +
                                   std::to_string(i));
}

// Similarity transform to the symmetrized coordinates: A = D^{1/2} M D^{-1/2}.
// M is an L^2(mX) contraction iff A is a Euclidean one.
inline Matd symmetrize(const Matd& M, const Vecd& mX) {
    const Eigen::Index n = M.rows();
    Vecd sq = mX.cwiseSqrt();
    Matd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = sq(i) * M(i, j) / sq(j);
    return A;
}

// Projects off the unit vector s = sqrt(mX) on both sides: A0 = (I-ss^T)A(I-ss^T).
inline Matd deflate_constants(const Matd& A, const Vecd& mX) {
    Vecd s = mX.cwiseSqrt(); // unit vector because mX sums to 1
    Vecd As = A * s;
    Vecd Ats = A.transpose() * s;
    const double sAs = s.dot(As);
    return A - As * s.transpose() - s * Ats.transpose() + sAs * (s * s.transpose());
}

struct NormResult {
    double value;
    std::string method;
    long iterations;
    double residual;
};

inline NormResult dense_top_singular(const Matd& A) {
    Eigen::JacobiSVD<Matd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double sigma = svd.singularValues()(0);
    const Vecd v = svd.matrixV().col(0);
    const Vecd u = svd.matrixU().col(0);
    const double residual = (A * v - sigma * u).norm();
    return {sigma, "dense", 0, residual};
}

// Power iteration on the Gram operator v -> A^T(A v). The start vector is the
// fixed alternating sign pattern so runs are reproducible.
inline NormResult power_top_singular(const Matd& A, const Vecd* deflect) {
    const Eigen::Index n = A.rows();
    Vecd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = (i % 2 == 0) ? 1.0 : -1.0;
    if (deflect) v -= (deflect->dot(v)) * (*deflect);
    double vn = v.norm();
    if (vn == 0.0) v(0) = 1.0, vn = 1.0;
    v /= vn;
    double rho = 0.0;
    for (long it = 1; it <= 100000; ++it) {
        Vecd w = A.transpose() * (A * v);
        const double rho_new = v.dot(w);
        const double wn = w.norm();
        if (wn == 0.0) return {0.0, "power_iteration", it, 0.0};
        const double residual = (w - rho_new * v).norm();
        if (std::fabs(rho_new - rho) < 1e-10 && it > 1)
            return {std::sqrt(std::max(rho_new, 0.0)), "power_iteration", it, residual};
        rho = rho_new;
        v = w / wn;
    }
    const double residual = (A.transpose() * (A * v) - rho * v).norm();
    throw certificate_error("spectral: power iteration did not converge, residual " +
                            std::to_string(residual));
}

inline NormResult top_singular(const Matd& A, NormMethod method, const Vecd* deflect) {
    switch (method) {
        case NormMethod::dense:
            return dense_top_singular(A);
        case NormMethod::power_iteration:
            return power_top_singular(A, deflect);
        case NormMethod::automatic:
        default:
            return A.rows() <= 500 ? dense_top_singular(A) : power_top_singular(A, deflect);
    }
}

} // namespace detail

// Spectral radius of M restricted to the complement of constants in L^2(mX).
// Dense eigensolve; meant for moderate sizes.
inline double l20_spectral_radius(const Matd& M, const Vecd& mX) {
    detail::require_positive_measure(mX);
    Matd A0 = detail::deflate_constants(detail::symmetrize(M, mX), mX);
    Eigen::EigenSolver<Matd> es(A0, /*computeEigenvectors=*/false);
    double radius = 0.0;
    for (Eigen::Index i = 0; i < A0.rows(); ++i)
        radius = std::max(radius, std::abs(es.eigenvalues()(i)));
    return radius;
}

// Operator norm of T on the complement of constants in L^2(mX): the largest
// singular value of the deflated symmetrized matrix.
inline SpectralReport l20_norm(const AveragingOp<double>& op,
                               NormMethod method = NormMethod::automatic) {
    detail::require_positive_measure(op.mX);
    Vecd s = op.mX.cwiseSqrt();
    Matd A0 = detail::deflate_constants(detail::symmetrize(op.T, op.mX), op.mX);
    detail::NormResult r = detail::top_singular(A0, method, &s);
    SpectralReport rep;
    rep.lambda = r.value;
    rep.method = r.method;
    rep.iterations = r.iterations;
    rep.residual = r.residual;
    if (op.T.rows() <= 500) rep.spectral_radius_l20 = l20_spectral_radius(op.T, op.mX);
    return rep;
}

// Full-space L^2(mX) operator norm, no deflation.
inline double weighted_operator_norm(const Matd& M, const Vecd& mX,
                                     NormMethod method = NormMethod::automatic) {
    if (M.rows() != M.cols()) throw validation_error("weighted_operator_norm: matrix not square");
    if (mX.size() != M.rows())
        throw validation_error("weighted_operator_norm: measure length does not match matrix");
    detail::require_positive_measure(mX);
    Matd A = detail::symmetrize(M, mX);
    return detail::top_singular(A, method, nullptr).value;
}

} // namespace specgap
