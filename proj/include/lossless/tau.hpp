#pragma once

///
/// \file tau.hpp
///
/// The map (W, U, V) -> (left, right) producing the unitary pair that turns a
/// Nudelman factor into the state-space recursion. The default uses the
/// Hermitian positive root T = P^{1/2}; tau_map_with_root accepts any T with
/// T* T = P (the mutual encoding uses T = Q).
///

#include <string>
#include <utility>

#include "jlossless.hpp"
#include "unitary_pair.hpp"

namespace lossless {

/// X = I_p - U (I - W*)^{-1} U*,  Y = (I - W)(I - W*)^{-1} U*.
inline std::pair<Matrix, Matrix> completion_blocks(const OutputNormalPair& pair)
{
    const Index p = pair.p();
    const Index d = pair.degree();
    const Matrix& U = pair.U();
    const Matrix& W = pair.W();
    // (I - W*)^{-1} U*; I - W* is invertible for stable W
    const Matrix s = (identity(d) - W.adjoint()).partialPivLu().solve(U.adjoint());
    Matrix X = identity(p) - U * s;
    Matrix Y = (identity(d) - W) * s;
    return {std::move(X), std::move(Y)};
}

/// The unitary completion [[X, U], [Y, W]] of the isometric column [U; W].
inline Matrix u_zero_completion(const OutputNormalPair& pair)
{
    const Index p = pair.p();
    const Index d = pair.degree();
    auto [X, Y] = completion_blocks(pair);
    Matrix out(p + d, p + d);
    out << X, pair.U(), Y, pair.W();
    return out;
}

inline UnitaryPair tau_map_with_root(const NudelmanData& data, const Matrix& T)
{
    const Index p = data.p();
    const Index d = data.delta();
    const Matrix& P = data.P().matrix();
    if (T.rows() != d || T.cols() != d) {
        throw std::invalid_argument("tau_map_with_root: root has the wrong shape");
    }
    const double root_res = (T.adjoint() * T - P).norm();
    if (!(root_res <= 1e-10 * std::max(P.norm(), 1.0))) {
        throw std::invalid_argument("tau_map_with_root: T* T != P (residual " +
                                    std::to_string(root_res) + ")");
    }
    const Matrix Tinv = checked_inverse(T, "tau_map_with_root: T");

    const Matrix Ut = data.U() * Tinv;
    const Matrix Wt = T * data.W() * Tinv;
    const Matrix Vt = data.V() * Tinv;

    // K = Ut* Ut + Wt* Wt = I + Vt* Vt for any root T of P.
    const Matrix K = identity(d) + Vt.adjoint() * Vt;
    const Matrix k_inv_sqrt = detail::hermitian_function(K, [](double x) { return 1.0 / std::sqrt(x); });
    const Matrix m_v = detail::hermitian_function(identity(p) + Vt * Vt.adjoint(),
                                                  [](double x) { return 1.0 / std::sqrt(x); });

    Matrix right(p + d, p + d);
    right << m_v, Vt * k_inv_sqrt, -Vt.adjoint() * m_v, k_inv_sqrt;

    auto [X, Y] = completion_blocks(data.pair());
    const Matrix Z = X.adjoint() * X + Y.adjoint() * P.ldlt().solve(Y);
    const Matrix z_sqrt = detail::hermitian_function(Z, [](double x) { return std::sqrt(x); });
    const Matrix L = Ut.adjoint() * X + Wt.adjoint() * T * Y;

    Matrix scaled(p + d, p + d);
    scaled << X, Ut, T * Y, Wt;
    Matrix factor = Matrix::Zero(p + d, p + d);
    factor.topLeftCorner(p, p) = z_sqrt;
    factor.bottomLeftCorner(d, p) = -K.ldlt().solve(L) * z_sqrt;
    factor.bottomRightCorner(d, d) = k_inv_sqrt;

    return UnitaryPair::make(scaled * factor, std::move(right), p);
}

inline UnitaryPair tau_map(const NudelmanData& data)
{
    return tau_map_with_root(data, hermitian_sqrt(data.P()));
}

} // namespace lossless
