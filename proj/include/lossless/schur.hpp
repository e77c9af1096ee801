#pragma once

///
/// \file schur.hpp
///
/// Balanced realizations of lossless functions and the Schur algorithm that
/// builds them (forward steps) or peels them apart (backward steps), one
/// Nudelman interpolation condition at a time.
///

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chart.hpp"
#include "jlossless.hpp"
#include "tau.hpp"

namespace lossless {

/// G(z) = D + C (zI - A)^{-1} B with realization matrix R = [[D, C], [B, A]].
struct BalancedRealization
{
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    Index n() const noexcept { return A.rows(); }
    Index p() const noexcept { return D.rows(); }

    Matrix realization_matrix() const
    {
        Matrix R(p() + n(), p() + n());
        R << D, C, B, A;
        return R;
    }

    static BalancedRealization from_realization_matrix(const Matrix& R, Index p)
    {
        const Index m = R.rows();
        if (R.cols() != m || p < 0 || p > m) {
            throw std::invalid_argument("from_realization_matrix: dimension mismatch");
        }
        const Index n = m - p;
        return {R.bottomRightCorner(n, n), R.bottomLeftCorner(n, p), R.topRightCorner(p, n),
                R.topLeftCorner(p, p)};
    }

    static BalancedRealization constant(Matrix D)
    {
        const Index p = D.rows();
        return {Matrix(0, 0), Matrix(0, p), Matrix(p, 0), std::move(D)};
    }

    void check_shapes() const
    {
        const Index n_ = A.rows();
        const Index p_ = D.rows();
        if (A.cols() != n_ || D.cols() != p_ || B.rows() != n_ || B.cols() != p_ || C.rows() != p_ ||
            C.cols() != n_) {
            throw std::invalid_argument("realization: inconsistent block shapes");
        }
    }
};

inline double unitarity_residual(const BalancedRealization& R)
{
    return unitarity_residual(R.realization_matrix());
}

inline void require_unitary(const BalancedRealization& R, const char* who)
{
    R.check_shapes();
    const double res = unitarity_residual(R);
    if (!(res <= tol::unitary)) {
        throw std::invalid_argument(std::string(who) + ": realization matrix is not unitary (residual " +
                                    std::to_string(res) + ")");
    }
}

inline Matrix eval_transfer(const BalancedRealization& R, cplx z)
{
    if (R.n() == 0) {
        return R.D;
    }
    Eigen::PartialPivLU<Matrix> lu(z * identity(R.n()) - R.A);
    if (!(lu.rcond() > tol::singular_rcond)) {
        throw numerical_error("eval_transfer: z is an eigenvalue of A");
    }
    return R.D + R.C * lu.solve(R.B);
}

inline TransferFunction transfer_function(BalancedRealization R)
{
    return [R = std::move(R)](cplx z) { return eval_transfer(R, z); };
}

/// McMillan degree: numerical rank (1e-8 relative) of the product of the
/// observability and controllability matrices over a horizon of 3n steps.
inline Index degree(const BalancedRealization& R)
{
    const Index n = R.n();
    const Index p = R.p();
    if (n == 0) {
        return 0;
    }
    const Index horizon = 3 * n;
    Matrix obs(p * horizon, n);
    Matrix ctr_adj(p * horizon, n); // [B, AB, ...]^*
    Matrix ca = R.C;
    Matrix ab = R.B;
    for (Index k = 0; k < horizon; ++k) {
        obs.middleRows(k * p, p) = ca;
        ctr_adj.middleRows(k * p, p) = ab.adjoint();
        ca = ca * R.A;
        ab = R.A * ab;
    }
    // sigma(O Ctr) = sigma(R_o R_c^*) with O = Q_o R_o, Ctr^* = Q_c R_c
    const Eigen::HouseholderQR<Matrix> qo(obs);
    const Eigen::HouseholderQR<Matrix> qc(ctr_adj);
    const Matrix ro = qo.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Matrix rc = qc.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(ro * rc.adjoint()).singularValues();
    if (sv(0) == 0.0) {
        return 0;
    }
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        rank += sv(i) > 1e-8 * sv(0) ? 1 : 0;
    }
    return rank;
}

/// Random balanced realization of a lossless function of degree n: a Haar
/// unitary (orthogonal when `real`) partitioned as [[D, C], [B, A]].
inline BalancedRealization random_lossless(Index p, Index n, std::uint64_t seed, bool real = false)
{
    if (p < 1 || n < 1) {
        throw std::invalid_argument("random_lossless: sizes must be >= 1");
    }
    std::mt19937_64 engine(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto R = BalancedRealization::from_realization_matrix(detail::haar_unitary(p + n, engine, real), p);
        if (spectral_radius(R.A) < 1.0 - tol::stability_margin && degree(R) == n) {
            return R;
        }
    }
    throw numerical_error("random_lossless: no minimal stable realization after 100 attempts");
}

/// One step of the realization recursion:
///
///     [[D~, C~], [B~, A~]] = diag(left, I_k) [[D, 0, C], [0, I_d, 0], [B, 0, A]] diag(right*, I_k).
///
/// The new state is ordered [d new states; k old states]. The transfer
/// function of the result is T_Phi(G) for Phi built from the pair.
inline BalancedRealization forward_step(const BalancedRealization& R, const UnitaryPair& pair)
{
    R.check_shapes();
    const Index p = R.p();
    const Index k = R.n();
    const Index d = pair.delta;
    if (pair.p != p) {
        throw std::invalid_argument("forward_step: pair partition does not match the realization");
    }
    const Index m = p + d + k;
    Matrix E = Matrix::Zero(m, m);
    E.topLeftCorner(p, p) = R.D;
    E.topRightCorner(p, k) = R.C;
    E.block(p, p, d, d) = identity(d);
    E.bottomLeftCorner(k, p) = R.B;
    E.bottomRightCorner(k, k) = R.A;

    Matrix out(m, m);
    // diag(left, I) * E
    out.topRows(p + d) = pair.left * E.topRows(p + d);
    out.bottomRows(k) = E.bottomRows(k);
    // (...) * diag(right*, I)
    out.leftCols(p + d) = (out.leftCols(p + d) * pair.right.adjoint()).eval();
    return BalancedRealization::from_realization_matrix(out, p);
}

struct BackwardStep
{
    Matrix V;
    BalancedRealization previous;
    HermitianPD P;
};

/// Extracts one interpolation condition from a unitary realization and
/// deflates it.
///
/// Q solves Q - A* Q W = C* U and V = D* U + B* Q W; P = Q* Q must be positive
/// definite. The state basis is rotated so that Q becomes [P^{1/2}; 0] (polar
/// factor from the SVD of Q), after which the recursion is undone by
/// diag(left*, I) R diag(right, I), whose middle block rows and columns must
/// equal [0, I, 0].
inline BackwardStep backward_step(const BalancedRealization& R, const OutputNormalPair& pair)
{
    R.check_shapes();
    const Index p = R.p();
    const Index n = R.n();
    const Index d = pair.degree();
    if (pair.p() != p) {
        throw std::invalid_argument("backward_step: pair has the wrong output dimension");
    }
    if (d > n) {
        throw std::invalid_argument("backward_step: pair degree exceeds the realization degree");
    }
    const Index k = n - d;
    const Matrix& U = pair.U();
    const Matrix& W = pair.W();

    const Matrix Q = solve_stein_sylvester(R.A, W, R.C.adjoint() * U);
    Matrix V = R.D.adjoint() * U + R.B.adjoint() * Q * W;
    NudelmanData data = NudelmanData::make(pair, V);
    const UnitaryPair up = tau_map(data);

    Eigen::JacobiSVD<Matrix> svd(Q, Eigen::ComputeFullU | Eigen::ComputeThinV);
    const Matrix& X = svd.matrixU();
    Matrix O(n, n);
    O.topRows(d) = svd.matrixV() * X.leftCols(d).adjoint();
    O.bottomRows(k) = X.rightCols(k).adjoint();

    Matrix Rs = R.realization_matrix();
    Rs.bottomRows(n) = (O * Rs.bottomRows(n)).eval();
    Rs.rightCols(n) = (Rs.rightCols(n) * O.adjoint()).eval();

    const Index m = p + n;
    Matrix E = Rs;
    E.topRows(p + d) = (up.left.adjoint() * E.topRows(p + d)).eval();
    E.leftCols(p + d) = (E.leftCols(p + d) * up.right).eval();

    Matrix expected_rows = Matrix::Zero(d, m);
    expected_rows.middleCols(p, d) = identity(d);
    const double mid_res = std::max((E.middleRows(p, d) - expected_rows).norm(),
                                    (E.middleCols(p, d) - expected_rows.adjoint()).norm());
    if (!(mid_res <= 1e-8)) {
        throw numerical_error("backward_step: deflation residual " + std::to_string(mid_res) +
                              " exceeds 1e-8");
    }

    Matrix prev(p + k, p + k);
    prev.topLeftCorner(p, p) = E.topLeftCorner(p, p);
    prev.topRightCorner(p, k) = E.topRightCorner(p, k);
    prev.bottomLeftCorner(k, p) = E.bottomLeftCorner(k, p);
    prev.bottomRightCorner(k, k) = E.bottomRightCorner(k, k);

    return BackwardStep{std::move(V), BalancedRealization::from_realization_matrix(prev, p), data.P()};
}

/// One interpolation condition (U_j, W_j, V_j) with its Stein solution P_j.
struct SchurStepRecord
{
    OutputNormalPair pair;
    Matrix V;
    HermitianPD P;
};

/// Full record of a Schur sequence: steps[j-1] is step j, realizations[j] is
/// R_j (realizations[0] is the constant G0).
struct SchurTrace
{
    std::vector<SchurStepRecord> steps;
    std::vector<BalancedRealization> realizations;

    const Matrix& g0() const { return realizations.front().D; }
    const BalancedRealization& result() const { return realizations.back(); }

    double min_step_eigenvalue() const
    {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& s : steps) {
            m = std::min(m, s.P.min_eigenvalue());
        }
        return m;
    }
};

namespace detail {

inline void check_coordinates(const ChartCoordinates& coords, const Chart& chart)
{
    if (coords.V.size() != chart.pairs.size()) {
        throw std::invalid_argument("coordinates: expected " + std::to_string(chart.pairs.size()) +
                                    " Schur parameters, got " + std::to_string(coords.V.size()));
    }
    for (std::size_t j = 0; j < coords.V.size(); ++j) {
        if (coords.V[j].rows() != chart.p() || coords.V[j].cols() != chart.pairs[j].degree()) {
            throw std::invalid_argument("coordinates: V_" + std::to_string(j + 1) + " has the wrong shape");
        }
    }
}

} // namespace detail

/// R_0 = G0, R_j = forward_step(R_{j-1}, tau(W_j, U_j, V_j)).
inline SchurTrace schur_synthesis(const ChartCoordinates& coords, const Chart& chart)
{
    detail::check_coordinates(coords, chart);
    SchurTrace trace;
    trace.realizations.push_back(
        BalancedRealization::constant(unitary_from_coords(coords.g0, chart.base_ref, chart.is_real())));
    for (std::size_t j = 0; j < chart.pairs.size(); ++j) {
        NudelmanData data = [&] {
            try {
                return NudelmanData::make(chart.pairs[j], coords.V[j]);
            } catch (const domain_error& e) {
                throw domain_error("synthesize: step " + std::to_string(j + 1) + ": " + e.what(), j + 1,
                                   e.min_eigenvalue());
            }
        }();
        trace.realizations.push_back(forward_step(trace.realizations.back(), tau_map(data)));
        trace.steps.push_back(SchurStepRecord{data.pair(), data.V(), data.P()});
    }
    return trace;
}

inline BalancedRealization synthesize(const ChartCoordinates& coords, const Chart& chart)
{
    return schur_synthesis(coords, chart).result();
}

/// Backward steps j = l, ..., 1; stops with a domain_error carrying the step
/// index when some P_j is not positive definite.
inline SchurTrace schur_analysis(const BalancedRealization& R, const Chart& chart)
{
    require_unitary(R, "analyze");
    if (R.p() != chart.p()) {
        throw std::invalid_argument("analyze: chart output dimension does not match");
    }
    if (R.n() != chart.degree()) {
        throw std::invalid_argument("analyze: degree mismatch (realization " + std::to_string(R.n()) +
                                    ", chart " + std::to_string(chart.degree()) + ")");
    }
    const std::size_t l = chart.pairs.size();
    SchurTrace trace;
    trace.steps.reserve(l);
    std::vector<BalancedRealization> chain{R};
    for (std::size_t j = l; j >= 1; --j) {
        BackwardStep bs = [&] {
            try {
                return backward_step(chain.back(), chart.pairs[j - 1]);
            } catch (const domain_error& e) {
                throw domain_error("analyze: out of chart domain at step " + std::to_string(j) + ": " +
                                       e.what(),
                                   j, e.min_eigenvalue());
            }
        }();
        trace.steps.push_back(SchurStepRecord{chart.pairs[j - 1], std::move(bs.V), bs.P});
        chain.push_back(std::move(bs.previous));
    }
    std::reverse(trace.steps.begin(), trace.steps.end());
    trace.realizations.assign(chain.rbegin(), chain.rend());
    return trace;
}

inline ChartCoordinates analyze(const BalancedRealization& R, const Chart& chart)
{
    const SchurTrace trace = schur_analysis(R, chart);
    ChartCoordinates coords;
    for (const auto& s : trace.steps) {
        if (chart.is_real() && max_imag(s.V) > 1e-9) {
            throw std::invalid_argument("analyze: real chart applied to a non-real function");
        }
        coords.V.push_back(chart.is_real() ? Matrix(s.V.real().cast<cplx>()) : s.V);
    }
    coords.g0 = unitary_coords(trace.g0(), chart.base_ref, chart.is_real());
    return coords;
}

} // namespace lossless
