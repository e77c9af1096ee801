#pragma once

#include <stdexcept>

#include "numcore.hpp"

namespace lossless {

/// Two (p+d) x (p+d) unitary matrices driving one step of the realization
/// recursion
///
///     Rnew = diag(left, I_k) [[D, 0, C], [0, I_d, 0], [B, 0, A]] diag(right*, I_k).
///
/// Each is partitioned as [[M, alpha], [beta*, kappa]] with M p x p,
/// alpha and beta p x d, and kappa d x d.
struct UnitaryPair
{
    Matrix left;
    Matrix right;
    Index p = 0;
    Index delta = 0;

    static UnitaryPair make(Matrix left, Matrix right, Index p)
    {
        const Index m = left.rows();
        if (left.cols() != m || right.rows() != m || right.cols() != m || p < 0 || p > m) {
            throw std::invalid_argument("UnitaryPair: dimension mismatch");
        }
        return UnitaryPair{std::move(left), std::move(right), p, m - p};
    }

    auto m_u() const { return left.topLeftCorner(p, p); }
    auto alpha_u() const { return left.topRightCorner(p, delta); }
    Matrix beta_u() const { return left.bottomLeftCorner(delta, p).adjoint(); }
    auto kappa_u() const { return left.bottomRightCorner(delta, delta); }

    auto m_v() const { return right.topLeftCorner(p, p); }
    auto alpha_v() const { return right.topRightCorner(p, delta); }
    Matrix beta_v() const { return right.bottomLeftCorner(delta, p).adjoint(); }
    auto kappa_v() const { return right.bottomRightCorner(delta, delta); }

    /// diag(M_u, M_v)
    Matrix M() const
    {
        Matrix out = Matrix::Zero(2 * p, 2 * p);
        out.topLeftCorner(p, p) = m_u();
        out.bottomRightCorner(p, p) = m_v();
        return out;
    }

    /// [alpha_u; alpha_v]
    Matrix alpha() const
    {
        Matrix out(2 * p, delta);
        out << alpha_u(), alpha_v();
        return out;
    }

    /// [beta_u; beta_v]
    Matrix beta() const
    {
        Matrix out(2 * p, delta);
        out << beta_u(), beta_v();
        return out;
    }

    double unitarity_residual() const
    {
        return std::max(lossless::unitarity_residual(left), lossless::unitarity_residual(right));
    }
};

} // namespace lossless
