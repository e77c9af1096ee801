#pragma once

///
/// \file chart.hpp
///
/// Charts of the manifold of p x p lossless functions of degree n: a sequence
/// of output normal pairs indexing the Schur steps, plus a reference unitary
/// around which the terminal constant G0 is given local coordinates.
///

#include <cmath>
#include <string>
#include <vector>

#include "numcore.hpp"

namespace lossless {

enum class AtlasKind { complex, real, mutual };

inline std::string to_string(AtlasKind kind)
{
    switch (kind) {
    case AtlasKind::complex: return "complex";
    case AtlasKind::real: return "real";
    case AtlasKind::mutual: return "mutual";
    }
    return "unknown";
}

inline AtlasKind atlas_kind_from_string(const std::string& s)
{
    if (s == "complex") return AtlasKind::complex;
    if (s == "real") return AtlasKind::real;
    if (s == "mutual") return AtlasKind::mutual;
    throw std::invalid_argument("unknown atlas kind '" + s + "'");
}

/// Largest absolute imaginary part of any entry.
inline double max_imag(const Matrix& M)
{
    return M.size() == 0 ? 0.0 : M.imag().cwiseAbs().maxCoeff();
}

inline constexpr double real_tolerance = 1e-12;

struct Chart
{
    AtlasKind kind = AtlasKind::complex;
    /// sigma = ((U_1, W_1), ..., (U_l, W_l)); step l is applied last.
    std::vector<OutputNormalPair> pairs;
    Matrix base_ref;

    static Chart make(AtlasKind kind, std::vector<OutputNormalPair> pairs, Matrix base_ref)
    {
        Chart c{kind, std::move(pairs), std::move(base_ref)};
        c.validate();
        return c;
    }

    Index p() const noexcept { return base_ref.rows(); }

    Index degree() const
    {
        Index n = 0;
        for (const auto& pr : pairs) {
            n += pr.degree();
        }
        return n;
    }

    bool is_real() const noexcept { return kind == AtlasKind::real; }

    void validate() const
    {
        const Index p = base_ref.rows();
        if (base_ref.cols() != p || p < 1) {
            throw std::invalid_argument("chart: base_ref must be square");
        }
        if (unitarity_residual(base_ref) > tol::unitary) {
            throw std::invalid_argument("chart: base_ref is not unitary");
        }
        for (const auto& pr : pairs) {
            if (pr.p() != p) {
                throw std::invalid_argument("chart: pair has wrong output dimension");
            }
        }
        switch (kind) {
        case AtlasKind::complex:
            for (const auto& pr : pairs) {
                if (pr.degree() != 1) {
                    throw std::invalid_argument("complex chart: every W_j must be 1 x 1");
                }
            }
            break;
        case AtlasKind::real:
            if (max_imag(base_ref) > real_tolerance) {
                throw std::invalid_argument("real chart: base_ref must be real");
            }
            for (const auto& pr : pairs) {
                if (pr.degree() != 1 && pr.degree() != 2) {
                    throw std::invalid_argument("real chart: W_j must be 1 x 1 or 2 x 2");
                }
                if (max_imag(pr.U()) > real_tolerance || max_imag(pr.W()) > real_tolerance) {
                    throw std::invalid_argument("real chart: pairs must be real");
                }
                if (pr.degree() == 2) {
                    const Matrix& W = pr.W();
                    const cplx tr = W.trace();
                    const cplx det = W.determinant();
                    if (!((tr * tr - 4.0 * det).real() < 0.0)) {
                        throw std::invalid_argument(
                            "real chart: 2 x 2 blocks need complex-conjugate eigenvalues");
                    }
                }
            }
            break;
        case AtlasKind::mutual:
            if (pairs.size() > 1) {
                throw std::invalid_argument("mutual chart: exactly one output normal pair");
            }
            break;
        }
    }
};

/// Coordinates of a point in a chart: the Schur parameters V_j (p x n_j) and
/// the local coordinates of G0 around the chart's base_ref.
struct ChartCoordinates
{
    std::vector<Matrix> V;
    Eigen::VectorXd g0;
};

inline Index unitary_coord_count(Index p, bool real)
{
    return real ? p * (p - 1) / 2 : p * p;
}

/// Real dimension of a chart: p^2 + 2np (complex, mutual) or p(p-1)/2 + np (real).
inline Index coordinate_count(const Chart& chart)
{
    const Index per_entry = chart.is_real() ? 1 : 2;
    return unitary_coord_count(chart.p(), chart.is_real()) + per_entry * chart.p() * chart.degree();
}

/// Flattens coordinates as [g0; entries of V_1; ...; V_l] (column-major, with
/// real and imaginary parts interleaved unless the chart is real).
inline Eigen::VectorXd to_real_vector(const ChartCoordinates& coords, const Chart& chart)
{
    Eigen::VectorXd x(coordinate_count(chart));
    Index k = 0;
    for (Index i = 0; i < coords.g0.size(); ++i) {
        x(k++) = coords.g0(i);
    }
    for (const auto& V : coords.V) {
        for (Index c = 0; c < V.cols(); ++c) {
            for (Index r = 0; r < V.rows(); ++r) {
                x(k++) = V(r, c).real();
                if (!chart.is_real()) {
                    x(k++) = V(r, c).imag();
                }
            }
        }
    }
    if (k != x.size()) {
        throw std::invalid_argument("to_real_vector: coordinates do not match the chart");
    }
    return x;
}

inline ChartCoordinates from_real_vector(const Eigen::VectorXd& x, const Chart& chart)
{
    if (x.size() != coordinate_count(chart)) {
        throw std::invalid_argument("from_real_vector: wrong coordinate count");
    }
    ChartCoordinates coords;
    const Index g = unitary_coord_count(chart.p(), chart.is_real());
    coords.g0 = x.head(g);
    Index k = g;
    for (const auto& pr : chart.pairs) {
        Matrix V(chart.p(), pr.degree());
        for (Index c = 0; c < V.cols(); ++c) {
            for (Index r = 0; r < V.rows(); ++r) {
                if (chart.is_real()) {
                    V(r, c) = x(k++);
                } else {
                    V(r, c) = cplx(x(k), x(k + 1));
                    k += 2;
                }
            }
        }
        coords.V.push_back(std::move(V));
    }
    return coords;
}

/// The origin of a chart: all Schur parameters zero and G0 = base_ref.
inline ChartCoordinates zero_coordinates(const Chart& chart)
{
    return from_real_vector(Eigen::VectorXd::Zero(coordinate_count(chart)), chart);
}

/// Independent real entries of the skew-Hermitian (or skew-symmetric)
/// logarithm S of base_ref* G0.
inline Eigen::VectorXd unitary_coords(const Matrix& G0, const Matrix& base_ref, bool real = false)
{
    const Index p = G0.rows();
    if (G0.cols() != p || base_ref.rows() != p || base_ref.cols() != p) {
        throw std::invalid_argument("unitary_coords: dimension mismatch");
    }
    const Matrix M = base_ref.adjoint() * G0;
    Eigen::ComplexSchur<Matrix> schur(M);
    const auto& T = schur.matrixT();
    Vector logs(p);
    for (Index i = 0; i < p; ++i) {
        const cplx lam = T(i, i);
        if (std::abs(lam + 1.0) < 1e-8) {
            throw domain_error("unitary_coords: G0 is at the cut locus of base_ref (eigenvalue -1)");
        }
        logs(i) = cplx(std::log(std::abs(lam)), std::arg(lam));
    }
    Matrix S = schur.matrixU() * logs.asDiagonal() * schur.matrixU().adjoint();
    S = 0.5 * (S - S.adjoint());

    Eigen::VectorXd x(unitary_coord_count(p, real));
    Index k = 0;
    if (real) {
        if (max_imag(S) > 1e-9) {
            throw domain_error("unitary_coords: no real logarithm (G0 and base_ref in different components)");
        }
        for (Index i = 0; i < p; ++i) {
            for (Index j = i + 1; j < p; ++j) {
                x(k++) = S(i, j).real();
            }
        }
    } else {
        for (Index i = 0; i < p; ++i) {
            x(k++) = S(i, i).imag();
        }
        for (Index i = 0; i < p; ++i) {
            for (Index j = i + 1; j < p; ++j) {
                x(k++) = S(i, j).real();
                x(k++) = S(i, j).imag();
            }
        }
    }
    return x;
}

/// Inverse of unitary_coords: base_ref * exp(S).
inline Matrix unitary_from_coords(const Eigen::VectorXd& x, const Matrix& base_ref, bool real = false)
{
    const Index p = base_ref.rows();
    if (x.size() != unitary_coord_count(p, real)) {
        throw std::invalid_argument("unitary_from_coords: wrong coordinate count");
    }
    Matrix S = Matrix::Zero(p, p);
    Index k = 0;
    if (real) {
        for (Index i = 0; i < p; ++i) {
            for (Index j = i + 1; j < p; ++j) {
                S(i, j) = x(k);
                S(j, i) = -x(k);
                ++k;
            }
        }
    } else {
        for (Index i = 0; i < p; ++i) {
            S(i, i) = cplx(0.0, x(k++));
        }
        for (Index i = 0; i < p; ++i) {
            for (Index j = i + 1; j < p; ++j) {
                const cplx s(x(k), x(k + 1));
                k += 2;
                S(i, j) = s;
                S(j, i) = -std::conj(s);
            }
        }
    }
    // S = -i H with H Hermitian, so exp(S) = E diag(exp(-i h)) E*.
    Eigen::SelfAdjointEigenSolver<Matrix> es(cplx(0.0, 1.0) * S);
    Vector phases(p);
    for (Index i = 0; i < p; ++i) {
        phases(i) = std::polar(1.0, -es.eigenvalues()(i));
    }
    Matrix E = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    if (real) {
        // exp of a real skew-symmetric matrix is real orthogonal
        E = E.real().cast<cplx>();
    }
    return base_ref * E;
}

} // namespace lossless
