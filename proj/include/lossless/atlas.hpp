#pragma once

///
/// \file atlas.hpp
///
/// Three atlases of charts for lossless functions and their adapted charts:
///
///  - complex: one-dimensional steps (u_j, w_j), peeled from a complex Schur
///    form of A;
///  - real: real steps of size 1 or 2, peeled from a real Schur form;
///  - mutual: a single step of full degree whose pair is (C, A) itself.
///
/// In an adapted chart every Schur parameter of the function is zero.
///

#include <limits>
#include <string>
#include <vector>

#include "schur.hpp"

namespace lossless {

namespace detail {

/// Peels leading diagonal blocks off a realization whose A is block upper
/// triangular, using the closed-form deflation
///
///     C <- C_hat + U_l (I - W_l)^{-1} A_hat*,   D <- D + U_l (I - W_l)^{-1} B_hat*.
///
/// `block_sizes` lists the diagonal block sizes from the top. Returns the
/// pairs in chart order (first peeled block is the last step) and the
/// terminal constant.
inline std::pair<std::vector<OutputNormalPair>, Matrix> peel_schur_form(BalancedRealization R,
                                                                       const std::vector<Index>& block_sizes)
{
    std::vector<OutputNormalPair> peeled;
    for (const Index s : block_sizes) {
        const Index m = R.n();
        const Index rest = m - s;
        // orthonormal columns [U; W] (polar factor); earlier deflations near
        // an eigenvalue 1 leave them slightly off
        Matrix col(R.p() + s, s);
        col << R.C.leftCols(s), R.A.topLeftCorner(s, s);
        Eigen::JacobiSVD<Matrix> cs(col, Eigen::ComputeThinU | Eigen::ComputeThinV);
        col = cs.matrixU() * cs.matrixV().adjoint();
        const Matrix U = col.topRows(R.p());
        const Matrix W = col.bottomRows(s);
        const Matrix gain = (identity(s) - W).partialPivLu().inverse();
        const Matrix a_hat_adj = R.A.topRightCorner(s, rest);
        const Matrix b_hat_adj = R.B.topRows(s);

        BalancedRealization next;
        next.C = R.C.rightCols(rest) + U * gain * a_hat_adj;
        next.D = R.D + U * gain * b_hat_adj;
        next.A = R.A.bottomRightCorner(rest, rest);
        next.B = R.B.bottomRows(rest);
        peeled.push_back(OutputNormalPair::make(U, W));
        R = std::move(next);
    }
    std::reverse(peeled.begin(), peeled.end());
    // The deflation divides by I - W_l, so an eigenvalue near 1 magnifies the
    // backward error of the Schur form; keep the unitary polar factor of D.
    Eigen::JacobiSVD<Matrix> svd(R.D, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {std::move(peeled), svd.matrixU() * svd.matrixV().adjoint()};
}

} // namespace detail

/// Adapted chart in the complex atlas: complex Schur form A = Q T Q*, then
/// scalar pairs (u_j, w_j) peeled from the leading column. The w_j are the
/// eigenvalues of A.
inline Chart adapted_chart_complex(const BalancedRealization& R)
{
    require_unitary(R, "adapted_chart_complex");
    const Index n = R.n();
    BalancedRealization S = R;
    if (n > 0) {
        Eigen::ComplexSchur<Matrix> cs(R.A);
        if (cs.info() != Eigen::Success) {
            throw numerical_error("adapted_chart_complex: Schur factorization failed");
        }
        const Matrix& Q = cs.matrixU();
        S.A = cs.matrixT().triangularView<Eigen::Upper>();
        S.B = Q.adjoint() * R.B;
        S.C = R.C * Q;
    }
    auto [pairs, g0] = detail::peel_schur_form(std::move(S), std::vector<Index>(n, 1));
    return Chart::make(AtlasKind::complex, std::move(pairs), std::move(g0));
}

/// Adapted chart in the real atlas, from a real Schur form of A. Blocks of
/// size 2 carry complex-conjugate eigenvalue pairs.
inline Chart adapted_chart_real(const BalancedRealization& R)
{
    require_unitary(R, "adapted_chart_real");
    const Matrix M = R.realization_matrix();
    if (max_imag(M) > real_tolerance) {
        throw std::invalid_argument("adapted_chart_real: realization has complex entries");
    }
    const Index n = R.n();
    BalancedRealization S = BalancedRealization::from_realization_matrix(M.real().cast<cplx>(), R.p());
    std::vector<Index> blocks;
    if (n > 0) {
        Eigen::RealSchur<Eigen::MatrixXd> rs(R.A.real());
        if (rs.info() != Eigen::Success) {
            throw numerical_error("adapted_chart_real: real Schur factorization failed");
        }
        const Eigen::MatrixXd& Q = rs.matrixU();
        Eigen::MatrixXd T = rs.matrixT();
        for (Index i = 0; i < n;) {
            const Index s = (i + 1 < n && T(i + 1, i) != 0.0) ? 2 : 1;
            blocks.push_back(s);
            // zero the (numerically negligible) entries below the block diagonal
            for (Index r = i + s; r < n; ++r) {
                for (Index c = i; c < i + s; ++c) {
                    T(r, c) = 0.0;
                }
            }
            i += s;
        }
        S.A = T.cast<cplx>();
        S.B = (Q.transpose() * R.B.real()).cast<cplx>();
        S.C = (R.C.real() * Q).cast<cplx>();
    }
    auto [pairs, g0] = detail::peel_schur_form(std::move(S), blocks);
    for (auto& pr : pairs) {
        pr = OutputNormalPair::make(pr.U().real().cast<cplx>(), pr.W().real().cast<cplx>());
    }
    return Chart::make(AtlasKind::real, std::move(pairs), g0.real().cast<cplx>());
}

/// Result of a mutual encoding: Schur parameter V, constant G0, and the
/// Stein solution Q of Q - A* Q W = C* U.
struct MutualEncoding
{
    Matrix V;
    Matrix g0;
    Matrix Q;
    double reconstruction_residual = 0.0;
};

/// Encodes R in the single-pair chart: R = left diag(G0, I_n) right* with
/// (left, right) = tau computed with the square root T = Q.
inline MutualEncoding mutual_encode(const BalancedRealization& R, const Chart& chart)
{
    require_unitary(R, "mutual_encode");
    if (chart.kind != AtlasKind::mutual) {
        throw std::invalid_argument("mutual_encode: chart is not a mutual-encoding chart");
    }
    if (R.n() != chart.degree() || R.p() != chart.p()) {
        throw std::invalid_argument("mutual_encode: degree mismatch");
    }
    const Index p = R.p();
    const Index n = R.n();
    if (n == 0) {
        return MutualEncoding{Matrix(p, 0), R.D, Matrix(0, 0), 0.0};
    }
    const OutputNormalPair& pair = chart.pairs.front();
    MutualEncoding enc;
    enc.Q = solve_stein_sylvester(R.A, pair.W(), R.C.adjoint() * pair.U());
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(enc.Q).singularValues();
    if (!(sv(sv.size() - 1) > 1e-8 * sv(0))) {
        throw domain_error("mutual_encode: Q is singular (condition number above 1e8)", 1,
                           sv(sv.size() - 1));
    }
    enc.V = R.D.adjoint() * pair.U() + R.B.adjoint() * enc.Q * pair.W();
    const NudelmanData data = NudelmanData::make(pair, enc.V);
    const UnitaryPair up = tau_map_with_root(data, enc.Q);
    const Matrix middle = up.left.adjoint() * R.realization_matrix() * up.right;
    enc.g0 = middle.topLeftCorner(p, p);
    Matrix expected = identity(p + n);
    expected.topLeftCorner(p, p) = enc.g0;
    enc.reconstruction_residual = (middle - expected).norm();
    if (!(enc.reconstruction_residual <= 1e-8)) {
        throw numerical_error("mutual_encode: reconstruction residual " +
                              std::to_string(enc.reconstruction_residual));
    }
    return enc;
}

/// Canonical-form realization left diag(G0, I_n) right* with (left, right) = tau(W, U, V).
inline BalancedRealization mutual_decode(const Chart& chart, const Matrix& V, const Matrix& G0)
{
    if (chart.kind != AtlasKind::mutual) {
        throw std::invalid_argument("mutual_decode: chart is not a mutual-encoding chart");
    }
    const Index p = chart.p();
    if (chart.pairs.empty()) {
        return BalancedRealization::constant(G0);
    }
    const Index n = chart.degree();
    const UnitaryPair up = tau_map(NudelmanData::make(chart.pairs.front(), V));
    Matrix middle = identity(p + n);
    middle.topLeftCorner(p, p) = G0;
    return BalancedRealization::from_realization_matrix(up.left * middle * up.right.adjoint(), p);
}

/// The chart of the pair (C, A); here Q = I_n, P = I_n and V = 0.
inline Chart adapted_chart_mutual(const BalancedRealization& R)
{
    require_unitary(R, "adapted_chart_mutual");
    if (R.n() == 0) {
        return Chart::make(AtlasKind::mutual, {}, R.D);
    }
    Chart chart = Chart::make(AtlasKind::mutual, {OutputNormalPair::make(R.C, R.A)}, identity(R.p()));
    // same polar cleanup as the sequential peel
    Eigen::JacobiSVD<Matrix> svd(mutual_encode(R, chart).g0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    chart.base_ref = svd.matrixU() * svd.matrixV().adjoint();
    chart.validate();
    return chart;
}

inline Chart adapted_chart(const BalancedRealization& R, AtlasKind kind)
{
    switch (kind) {
    case AtlasKind::complex: return adapted_chart_complex(R);
    case AtlasKind::real: return adapted_chart_real(R);
    case AtlasKind::mutual: return adapted_chart_mutual(R);
    }
    throw std::invalid_argument("adapted_chart: unknown atlas kind");
}

struct MembershipReport
{
    bool in_domain = false;
    /// 1/cond(Q) for mutual charts, min_j lambda_min(P_j) for sequential ones.
    double quality = 0.0;
    /// 1-based failing step, 0 when in domain.
    std::size_t failing_step = 0;
};

inline MembershipReport chart_membership(const BalancedRealization& R, const Chart& chart)
{
    require_unitary(R, "chart_membership");
    if (R.n() != chart.degree() || R.p() != chart.p()) {
        throw std::invalid_argument("chart_membership: degree mismatch");
    }
    MembershipReport rep;
    if (chart.pairs.empty()) {
        rep.in_domain = true;
        rep.quality = 1.0;
        return rep;
    }
    if (chart.kind == AtlasKind::mutual) {
        const OutputNormalPair& pair = chart.pairs.front();
        const Matrix Q = solve_stein_sylvester(R.A, pair.W(), R.C.adjoint() * pair.U());
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(Q).singularValues();
        rep.quality = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
        rep.in_domain = rep.quality > 1e-8;
        rep.failing_step = rep.in_domain ? 0 : 1;
        return rep;
    }
    try {
        rep.quality = schur_analysis(R, chart).min_step_eigenvalue();
        rep.in_domain = true;
    } catch (const domain_error& e) {
        rep.quality = e.min_eigenvalue();
        rep.failing_step = e.step();
    }
    return rep;
}

/// Coordinates of the same function in another chart of the same atlas.
inline ChartCoordinates chart_switch(const ChartCoordinates& coords, const Chart& from, const Chart& to)
{
    if (from.kind != to.kind || from.degree() != to.degree() || from.p() != to.p()) {
        throw std::invalid_argument("chart_switch: charts differ in kind or degree");
    }
    return analyze(synthesize(coords, from), to);
}

/// Omega(z) = X + U (zI - W)^{-1} Y, realized by the unitary completion
/// [[X, U], [Y, W]].
inline BalancedRealization omega_of_chart(const OutputNormalPair& pair)
{
    return BalancedRealization::from_realization_matrix(u_zero_completion(pair), pair.p());
}

/// G = B_l ... B_1 G0 with each B_j = Omega of the j-th adapted pair.
struct PotapovFactorization
{
    /// factors[0] = B_l, ..., factors[l-1] = B_1
    std::vector<BalancedRealization> factors;
    Matrix g0;

    Matrix eval(cplx z) const
    {
        Matrix out = identity(g0.rows());
        for (const auto& f : factors) {
            out = out * eval_transfer(f, z);
        }
        return out * g0;
    }
};

inline PotapovFactorization potapov_factorize(const BalancedRealization& R, AtlasKind kind)
{
    const Chart chart = adapted_chart(R, kind);
    PotapovFactorization out;
    for (auto it = chart.pairs.rbegin(); it != chart.pairs.rend(); ++it) {
        out.factors.push_back(omega_of_chart(*it));
    }
    out.g0 = chart.base_ref;
    return out;
}

} // namespace lossless
