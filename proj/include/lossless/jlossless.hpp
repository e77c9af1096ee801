#pragma once

///
/// \file jlossless.hpp
///
/// J-lossless factors and the linear fractional transformations they induce.
///
/// Conventions: J = diag(I_p, -I_p); a 2p x 2p function F is J-lossless when
/// F J F* <= J outside the closed unit disk with equality on the circle.
///

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "numcore.hpp"
#include "unitary_pair.hpp"

namespace lossless {

/// The signature matrix J = diag(I_p, -I_p).
struct SignatureJ
{
    Index p = 0;

    Matrix matrix() const
    {
        Matrix J = identity(2 * p);
        J.bottomRightCorner(p, p) *= -1.0;
        return J;
    }
};

/// An admissible Nudelman data set: an output normal pair (U, W), the
/// interpolation values V, and the positive definite solution P of
/// P - W* P W = U* U - V* V, computed once at construction.
class NudelmanData
{
public:
    /// Throws domain_error if P is not positive definite.
    static NudelmanData make(OutputNormalPair pair, Matrix V)
    {
        if (V.rows() != pair.p() || V.cols() != pair.degree()) {
            throw std::invalid_argument("NudelmanData: V has the wrong shape");
        }
        const Matrix P = solve_stein_symmetric(pair.W(), pair.U(), V);
        const PdReport r = is_positive_definite(P);
        if (!r.positive) {
            throw domain_error("inadmissible Nudelman data: Stein solution is not positive definite",
                               0, r.min_eigenvalue);
        }
        return NudelmanData(std::move(pair), std::move(V), HermitianPD::certify(P));
    }

    const OutputNormalPair& pair() const noexcept { return pair_; }
    const Matrix& U() const noexcept { return pair_.U(); }
    const Matrix& W() const noexcept { return pair_.W(); }
    const Matrix& V() const noexcept { return v_; }
    const HermitianPD& P() const noexcept { return p_; }
    Index p() const noexcept { return pair_.p(); }
    Index delta() const noexcept { return pair_.degree(); }

    /// C = [U; V]
    Matrix C() const
    {
        Matrix c(2 * p(), delta());
        c << U(), V();
        return c;
    }

private:
    NudelmanData(OutputNormalPair pair, Matrix V, HermitianPD P)
        : pair_(std::move(pair)), v_(std::move(V)), p_(std::move(P))
    {
    }

    OutputNormalPair pair_;
    Matrix v_;
    HermitianPD p_;
};

/// Raised when an LFT denominator is singular at a particular point.
class lft_singular_point : public numerical_error
{
public:
    using numerical_error::numerical_error;
};

/// F^#(z) = F(1/conj z)^*.
inline Matrix sharp_eval(const TransferFunction& G, cplx z)
{
    if (z == cplx(0.0)) {
        throw numerical_error("sharp_eval: 1/conj(z) is undefined at z = 0");
    }
    return G(1.0 / std::conj(z)).adjoint();
}

/// Theta(z) = I - (z-1) C (zI - W)^{-1} P^{-1} (I - W)^{-*} C* J,  C = [U; V].
inline Matrix theta_eval(const NudelmanData& data, cplx z)
{
    const Index p = data.p();
    const Index d = data.delta();
    if (d == 0) {
        return identity(2 * p);
    }
    const Matrix C = data.C();
    const Matrix resolvent = checked_inverse(z * identity(d) - data.W(), "theta_eval: zI - W");
    const Matrix right = (identity(d) - data.W()).adjoint().partialPivLu().solve(C.adjoint() *
                                                                                   SignatureJ{p}.matrix());
    const Matrix middle = data.P().matrix().ldlt().solve(right);
    return identity(2 * p) - (z - 1.0) * C * resolvent * middle;
}

namespace detail {

inline Matrix checked_pencil_inverse(const Matrix& pencil, const char* what)
{
    Eigen::PartialPivLU<Matrix> lu(pencil);
    if (!(lu.rcond() > 1e-12)) {
        throw numerical_error(std::string(what) + ": singular pencil");
    }
    return lu.inverse();
}

} // namespace detail

/// H = M + alpha (kappa_v - kappa_u)^{-1} beta* J, the value of Phi at z = 1.
inline Matrix h_constant(const UnitaryPair& pair)
{
    const Matrix J = SignatureJ{pair.p}.matrix();
    if (pair.delta == 0) {
        return pair.M();
    }
    const Matrix inv = detail::checked_pencil_inverse(pair.kappa_v() - pair.kappa_u(),
                                                      "h_constant: kappa_v - kappa_u");
    return pair.M() + pair.alpha() * inv * pair.beta().adjoint() * J;
}

/// Phi(z) = M + alpha (kappa_v z - kappa_u)^{-1} beta* J diag(I_p, z I_p).
inline Matrix phi_eval(const UnitaryPair& pair, cplx z)
{
    const Index p = pair.p;
    if (pair.delta == 0) {
        return pair.M();
    }
    Matrix tail = pair.beta().adjoint() * SignatureJ{p}.matrix();
    tail.rightCols(p) *= z;
    const Matrix inv = detail::checked_pencil_inverse(z * pair.kappa_v() - pair.kappa_u(),
                                                      "phi_eval: kappa_v z - kappa_u");
    return pair.M() + pair.alpha() * inv * tail;
}

/// A 2p x 2p J-lossless function: a Nudelman factor Theta, a Phi built from a
/// unitary pair, or a constant J-unitary matrix.
class JLosslessFactor
{
public:
    enum class Kind { theta, phi, constant };

    static JLosslessFactor theta(NudelmanData data) { return JLosslessFactor(std::move(data)); }
    static JLosslessFactor phi(UnitaryPair pair) { return JLosslessFactor(std::move(pair)); }
    static JLosslessFactor constant(Matrix H)
    {
        if (H.rows() != H.cols() || H.rows() % 2 != 0) {
            throw std::invalid_argument("JLosslessFactor: constant must be 2p x 2p");
        }
        return JLosslessFactor(std::move(H));
    }

    Kind kind() const noexcept { return static_cast<Kind>(payload_.index()); }

    Index p() const
    {
        return std::visit(
            [](const auto& x) -> Index {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, NudelmanData>) {
                    return x.p();
                } else if constexpr (std::is_same_v<T, UnitaryPair>) {
                    return x.p;
                } else {
                    return x.rows() / 2;
                }
            },
            payload_);
    }

    Matrix operator()(cplx z) const
    {
        return std::visit(
            [z](const auto& x) -> Matrix {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, NudelmanData>) {
                    return theta_eval(x, z);
                } else if constexpr (std::is_same_v<T, UnitaryPair>) {
                    return phi_eval(x, z);
                } else {
                    return x;
                }
            },
            payload_);
    }

private:
    using Payload = std::variant<NudelmanData, UnitaryPair, Matrix>;
    explicit JLosslessFactor(Payload payload) : payload_(std::move(payload)) {}

    Payload payload_;
};

/// T_Theta(F) = (Theta11 F + Theta12)(Theta21 F + Theta22)^{-1} for point values.
inline Matrix lft(const Matrix& theta, const Matrix& F)
{
    const Index p = F.rows();
    if (theta.rows() != 2 * p || theta.cols() != 2 * p || F.cols() != p) {
        throw std::invalid_argument("lft: dimension mismatch");
    }
    const Matrix num = theta.topLeftCorner(p, p) * F + theta.topRightCorner(p, p);
    const Matrix den = theta.bottomLeftCorner(p, p) * F + theta.bottomRightCorner(p, p);
    Eigen::PartialPivLU<Matrix> lu(den);
    if (!(lu.rcond() > tol::singular_rcond)) {
        throw lft_singular_point("lft: singular denominator");
    }
    // num * den^{-1} = (den^{-*} num^*)^*
    return den.adjoint().partialPivLu().solve(num.adjoint()).adjoint();
}

inline Matrix lft_apply(const JLosslessFactor& theta, const TransferFunction& F, cplx z)
{
    return lft(theta(z), F(z));
}

struct JLosslessReport
{
    double circle_residual = 0.0;     // max |F J F* - J|_F on |z| = 1
    double exterior_violation = 0.0;  // max positive part of F J F* - J on |z| = 2
    bool passed = false;
};

/// Samples the J-lossless conditions at random points of |z| = 1 and |z| = 2.
inline JLosslessReport is_j_lossless(const JLosslessFactor& F, int samples,
                                     std::uint64_t seed = 0x5eed, double tolerance = 1e-10)
{
    if (samples < 8) {
        throw std::invalid_argument("is_j_lossless: need at least 8 samples");
    }
    const Matrix J = SignatureJ{F.p()}.matrix();
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
    JLosslessReport rep;
    for (int k = 0; k < samples; ++k) {
        const Matrix on = F(std::polar(1.0, angle(engine)));
        rep.circle_residual = std::max(rep.circle_residual, (on * J * on.adjoint() - J).norm());
        const Matrix out = F(std::polar(2.0, angle(engine)));
        const Matrix gap = J - out * J * out.adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gap + gap.adjoint()), Eigen::EigenvaluesOnly);
        rep.exterior_violation = std::max(rep.exterior_violation, -es.eigenvalues().minCoeff());
    }
    rep.passed = rep.circle_residual <= tolerance && rep.exterior_violation <= tolerance;
    return rep;
}

/// (W, U, V) -> (W, Lambda U, Pi V). Theta transforms as
/// diag(Lambda, Pi) Theta diag(Lambda*, Pi*).
inline NudelmanData equivariance_transform(const NudelmanData& data, const Matrix& Lambda,
                                           const Matrix& Pi)
{
    const Index p = data.p();
    if (Lambda.rows() != p || Pi.rows() != p) {
        throw std::invalid_argument("equivariance_transform: dimension mismatch");
    }
    if (unitarity_residual(Lambda) > tol::unitary || unitarity_residual(Pi) > tol::unitary) {
        throw std::invalid_argument("equivariance_transform: Lambda and Pi must be unitary");
    }
    return NudelmanData::make(OutputNormalPair::make(Lambda * data.U(), data.W()), Pi * data.V());
}

} // namespace lossless
