#pragma once

///
/// \file numcore.hpp
///
/// Dense complex matrix utilities: Stein equation solvers, Hermitian matrix
/// functions, positive-definiteness tests, seeded random unitary matrices and
/// output normal pairs, and a trapezoid-rule contour integral on the unit
/// circle.
///

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "errors.hpp"

namespace lossless {

using cplx   = std::complex<double>;
using Index  = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Evaluates a p x p rational matrix function at a complex point.
using TransferFunction = std::function<Matrix(cplx)>;

namespace tol {
inline constexpr double hermitian        = 1e-10; // relative, Frobenius
inline constexpr double positive         = 1e-10; // relative to |M|_2
inline constexpr double unitary          = 1e-10;
inline constexpr double sqrt_residual    = 1e-12;
inline constexpr double stability_margin = 1e-8;
inline constexpr double singular_rcond   = 1e-14;
} // namespace tol

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

/// Frobenius norm of M* M - I.
inline double unitarity_residual(const Matrix& M)
{
    if (M.size() == 0) {
        return 0.0;
    }
    return (M.adjoint() * M - identity(M.cols())).norm();
}

inline double spectral_radius(const Matrix& M)
{
    if (M.rows() == 0) {
        return 0.0;
    }
    Eigen::ComplexEigenSolver<Matrix> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& M, double rel_tol = tol::hermitian)
{
    if (M.rows() != M.cols()) {
        return false;
    }
    return (M - M.adjoint()).norm() <= rel_tol * std::max(M.norm(), 1e-300);
}

/// Inverse with a reciprocal-condition guard.
inline Matrix checked_inverse(const Matrix& M, const std::string& what)
{
    if (M.rows() == 0) {
        return M;
    }
    Eigen::PartialPivLU<Matrix> lu(M);
    if (!(lu.rcond() > tol::singular_rcond)) {
        throw numerical_error(what + ": matrix is singular to working precision");
    }
    return lu.inverse();
}

namespace detail {

template <typename F>
Matrix hermitian_function(const Matrix& M, F f)
{
    if (M.rows() == 0) {
        return M;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.adjoint()));
    const Eigen::VectorXd mapped = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

inline void require_stable(const Matrix& M, const char* name)
{
    const double rho = spectral_radius(M);
    if (!(rho < 1.0 - 1e-12)) {
        throw numerical_error(std::string(name) + " is not stable (spectral radius " +
                              std::to_string(rho) + ")");
    }
}

} // namespace detail

/// Result of a positive-definiteness probe.
struct PdReport
{
    bool positive = false;
    double min_eigenvalue = 0.0;
};

/// True iff M is Hermitian (within tol::hermitian) and the smallest
/// eigenvalue of (M+M*)/2 exceeds tol::positive * |M|_2.
inline PdReport is_positive_definite(const Matrix& M)
{
    PdReport r;
    if (M.rows() != M.cols()) {
        r.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    if (M.rows() == 0) {
        r.positive = true;
        r.min_eigenvalue = std::numeric_limits<double>::infinity();
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.adjoint()), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    r.min_eigenvalue = ev.minCoeff();
    const double norm2 = ev.cwiseAbs().maxCoeff();
    r.positive = is_hermitian(M) && r.min_eigenvalue > tol::positive * norm2;
    return r;
}

/// A matrix certified Hermitian positive definite at construction.
class HermitianPD
{
public:
    /// Throws domain_error when M fails the certification.
    static HermitianPD certify(const Matrix& M)
    {
        const PdReport r = is_positive_definite(M);
        if (!r.positive) {
            throw domain_error("matrix is not Hermitian positive definite (min eigenvalue " +
                                   std::to_string(r.min_eigenvalue) + ")",
                               0, r.min_eigenvalue);
        }
        return HermitianPD(0.5 * (M + M.adjoint()), r.min_eigenvalue);
    }

    const Matrix& matrix() const noexcept { return m_; }
    double min_eigenvalue() const noexcept { return min_eig_; }
    Index size() const noexcept { return m_.rows(); }

private:
    HermitianPD(Matrix m, double min_eig) : m_(std::move(m)), min_eig_(min_eig) {}

    Matrix m_;
    double min_eig_;
};

/// The unique Hermitian positive square root, by spectral decomposition.
inline Matrix hermitian_sqrt(const HermitianPD& P)
{
    return detail::hermitian_function(P.matrix(), [](double x) { return std::sqrt(x); });
}

inline Matrix hermitian_inv_sqrt(const HermitianPD& P)
{
    return detail::hermitian_function(P.matrix(), [](double x) { return 1.0 / std::sqrt(x); });
}

/// Solves P - W* P W = U* U - V* V for the Hermitian P.
///
/// The Stein operator is linearized as I - (W^T kron W*) acting on vec(P) and
/// solved densely; intended for the small state dimensions met here.
inline Matrix solve_stein_symmetric(const Matrix& W, const Matrix& U, const Matrix& V)
{
    const Index d = W.rows();
    if (W.cols() != d || U.cols() != d || V.cols() != d || U.rows() != V.rows()) {
        throw std::invalid_argument("solve_stein_symmetric: dimension mismatch");
    }
    if (d == 0) {
        return Matrix(0, 0);
    }
    detail::require_stable(W, "W");
    const Matrix rhs = U.adjoint() * U - V.adjoint() * V;
    const Matrix op = identity(d * d) - Matrix(Eigen::kroneckerProduct(W.transpose(), W.adjoint()));
    const Vector x = op.partialPivLu().solve(rhs.reshaped());
    const Matrix P = x.reshaped(d, d);
    return 0.5 * (P + P.adjoint());
}

/// Solves Q - A* Q W = RHS (A is n x n, W is d x d, RHS is n x d).
inline Matrix solve_stein_sylvester(const Matrix& A, const Matrix& W, const Matrix& rhs)
{
    const Index n = A.rows();
    const Index d = W.rows();
    if (A.cols() != n || W.cols() != d || rhs.rows() != n || rhs.cols() != d) {
        throw std::invalid_argument("solve_stein_sylvester: dimension mismatch");
    }
    if (n == 0 || d == 0) {
        return rhs;
    }
    detail::require_stable(A, "A");
    detail::require_stable(W, "W");
    const Matrix op = identity(n * d) - Matrix(Eigen::kroneckerProduct(W.transpose(), A.adjoint()));
    const Vector x = op.partialPivLu().solve(rhs.reshaped());
    return x.reshaped(n, d);
}

namespace detail {

/// Haar-distributed unitary (or orthogonal when real) matrix from a Gaussian
/// sample: QR with the phases of diag(R) folded back into Q.
template <typename Engine>
Matrix haar_unitary(Index m, Engine& engine, bool real)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix G(m, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) {
            if (real) {
                G(i, j) = cplx(gauss(engine), 0.0);
            } else {
                const double re = gauss(engine);
                const double im = gauss(engine);
                G(i, j) = cplx(re, im) / std::sqrt(2.0);
            }
        }
    }
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    for (Index j = 0; j < m; ++j) {
        const cplx r = qr.matrixQR()(j, j);
        const double a = std::abs(r);
        Q.col(j) *= (a > 0.0) ? r / a : cplx(1.0);
    }
    return Q;
}

} // namespace detail

/// Seeded Haar-random m x m unitary matrix (real orthogonal when `real`).
inline Matrix random_unitary(Index m, std::uint64_t seed, bool real = false)
{
    if (m < 1) {
        throw std::invalid_argument("random_unitary: m must be >= 1");
    }
    std::mt19937_64 engine(seed);
    return detail::haar_unitary(m, engine, real);
}

/// An output normal pair (U, W): U* U + W* W = I and W stable.
///
/// Observability is implied by the other two invariants: W x = l x with
/// U x = 0 would force |l| = 1.
class OutputNormalPair
{
public:
    static OutputNormalPair make(Matrix U, Matrix W)
    {
        const Index d = W.rows();
        if (W.cols() != d || U.cols() != d) {
            throw std::invalid_argument("OutputNormalPair: dimension mismatch");
        }
        const double res = (U.adjoint() * U + W.adjoint() * W - identity(d)).norm();
        if (!(res <= tol::unitary)) {
            throw std::invalid_argument("OutputNormalPair: U*U + W*W != I (residual " +
                                        std::to_string(res) + ")");
        }
        const double rho = spectral_radius(W);
        if (!(rho < 1.0)) {
            throw std::invalid_argument("OutputNormalPair: W is not stable");
        }
        return OutputNormalPair(std::move(U), std::move(W));
    }

    const Matrix& U() const noexcept { return u_; }
    const Matrix& W() const noexcept { return w_; }
    Index p() const noexcept { return u_.rows(); }
    Index degree() const noexcept { return w_.rows(); }

private:
    OutputNormalPair(Matrix U, Matrix W) : u_(std::move(U)), w_(std::move(W)) {}

    Matrix u_;
    Matrix w_;
};

/// Random output normal pair taken as the (C, A) blocks of a Haar unitary
/// realization matrix; retries while the spectral radius of W exceeds
/// 1 - tol::stability_margin.
inline OutputNormalPair random_output_normal_pair(Index p, Index delta, std::uint64_t seed,
                                                  bool real = false)
{
    if (p < 1 || delta < 1) {
        throw std::invalid_argument("random_output_normal_pair: sizes must be >= 1");
    }
    std::mt19937_64 engine(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const Matrix R = detail::haar_unitary(p + delta, engine, real);
        Matrix W = R.bottomRightCorner(delta, delta);
        if (spectral_radius(W) < 1.0 - tol::stability_margin) {
            return OutputNormalPair::make(R.topRightCorner(p, delta), std::move(W));
        }
    }
    throw numerical_error("random_output_normal_pair: no stable pair after 100 attempts");
}

/// Trapezoid rule on N equispaced points of the unit circle for
///
///     V = 1/(2 i pi) \oint G^#(z) U (z I - W)^{-1} dz,   G^#(z) = G(1/conj z)^*.
///
/// With z = e^{i t}, dz = i z dt, the integral is the mean of G^#(z) U (zI-W)^{-1} z.
inline Matrix circle_quadrature_interpolant(const TransferFunction& G, const Matrix& U,
                                            const Matrix& W, Index N)
{
    if (N < 64 || (N & (N - 1)) != 0) {
        throw std::invalid_argument("circle_quadrature_interpolant: N must be a power of two >= 64");
    }
    const Index d = W.rows();
    if (W.cols() != d || U.cols() != d) {
        throw std::invalid_argument("circle_quadrature_interpolant: dimension mismatch");
    }
    detail::require_stable(W, "W");
    const double two_pi = 2.0 * std::acos(-1.0);
    Matrix acc = Matrix::Zero(U.rows(), d);
    for (Index k = 0; k < N; ++k) {
        const cplx z = std::polar(1.0, two_pi * static_cast<double>(k) / static_cast<double>(N));
        const Matrix sharp = G(1.0 / std::conj(z)).adjoint();
        const Matrix resolvent = (z * identity(d) - W).partialPivLu().inverse();
        acc += sharp * U * resolvent * z;
    }
    return acc / static_cast<double>(N);
}

} // namespace lossless
