#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace lossless;

namespace {

/// Scalar Blaschke factor b(z) = (1 - conj(a) z) / (z - a) as a unitary
/// realization [[-conj(a), c], [c, a]] with c = sqrt(1 - |a|^2).
BalancedRealization blaschke(cplx a)
{
    const double c = std::sqrt(1.0 - std::norm(a));
    BalancedRealization R;
    R.A = Matrix::Constant(1, 1, a);
    R.B = Matrix::Constant(1, 1, c);
    R.C = Matrix::Constant(1, 1, c);
    R.D = Matrix::Constant(1, 1, -std::conj(a));
    return R;
}

/// Random point with 1.1 <= |z| <= 3.
cplx exterior_point(std::mt19937_64& e)
{
    std::uniform_real_distribution<double> u(0.0, 6.28);
    std::uniform_real_distribution<double> r(1.1, 3.0);
    return std::polar(r(e), u(e));
}

} // namespace

TEST(SignatureJ, Involution)
{
    const Matrix J = SignatureJ{3}.matrix();
    EXPECT_EQ(J * J, identity(6));
    EXPECT_EQ(J, J.adjoint());
}

TEST(Sharp, ConstantUnitary)
{
    const Matrix D = random_unitary(3, 8);
    const TransferFunction G = [D](cplx) { return D; };
    EXPECT_LT((sharp_eval(G, cplx(0.3, 2.0)) - D.adjoint()).norm(), 1e-15);
}

TEST(Sharp, LosslessOnCircleIsInverse)
{
    const auto R = random_lossless(2, 4, 3);
    for (int k = 0; k < 16; ++k) {
        const cplx z = std::polar(1.0, 0.4 * k + 0.1);
        const Matrix G = eval_transfer(R, z);
        EXPECT_LT((sharp_eval(transfer_function(R), z) - G.inverse()).norm(), 1e-12);
    }
}

TEST(Sharp, BlaschkeConjugateReciprocal)
{
    const cplx a(0.5, 0.0);
    const auto b = blaschke(a);
    const auto closed = [a](cplx z) { return (1.0 - std::conj(a) * z) / (z - a); };
    // b(2) = 0 and b^#(2) has its pole there: the identity b^# b = 1 is a
    // rational identity, checked at points of |z| = 2 off the real axis
    EXPECT_NEAR(std::abs(eval_transfer(b, 2.0)(0, 0)), 0.0, 1e-15);
    EXPECT_THROW(sharp_eval(transfer_function(b), 2.0), numerical_error);
    for (int k = 1; k < 8; ++k) {
        const cplx z = std::polar(2.0, 0.7 * k);
        const cplx bz = eval_transfer(b, z)(0, 0);
        EXPECT_NEAR(std::abs(bz - closed(z)), 0.0, 1e-14);
        const cplx bs = sharp_eval(transfer_function(b), z)(0, 0);
        EXPECT_NEAR(std::abs(bs * bz - 1.0), 0.0, 1e-13);
    }
}

TEST(Theta, IdentityAtOne)
{
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto data = oracle::admissible_data(1 + s % 3, 1 + s % 4, s);
        EXPECT_LT((theta_eval(data, 1.0) - identity(2 * data.p())).norm(), 1e-13);
    }
}

TEST(Theta, EmptyDataIsIdentity)
{
    const auto data = NudelmanData::make(OutputNormalPair::make(Matrix(2, 0), Matrix(0, 0)), Matrix(2, 0));
    EXPECT_EQ(theta_eval(data, cplx(0.3, 0.7)), identity(4));
}

TEST(Theta, JUnitaryOnCircle)
{
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto data = oracle::admissible_data(1 + s % 3, 1 + s % 5, 100 + s);
        const Matrix J = SignatureJ{data.p()}.matrix();
        const Matrix th = theta_eval(data, cplx(0.0, 1.0));
        EXPECT_LT((th * J * th.adjoint() - J).norm(), 1e-10);
    }
}

TEST(Theta, TwoPointKernel)
{
    // J - Theta(z) J Theta(l)* = (z conj(l) - 1) C (zI - W)^{-1} P^{-1} (lI - W)^{-*} C*
    std::mt19937_64 e(5);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto data = oracle::admissible_data(2, 1 + s % 3, 200 + s);
        const Index d = data.delta();
        const Matrix J = SignatureJ{2}.matrix();
        const Matrix C = data.C();
        const Matrix Pinv = data.P().matrix().inverse();
        for (int k = 0; k < 5; ++k) {
            const cplx z = exterior_point(e);
            const cplx l = exterior_point(e);
            const Matrix lhs = J - theta_eval(data, z) * J * theta_eval(data, l).adjoint();
            const Matrix rhs = (z * std::conj(l) - 1.0) * C * (z * identity(d) - data.W()).inverse() * Pinv *
                               (l * identity(d) - data.W()).inverse().adjoint() * C.adjoint();
            EXPECT_LT((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
        }
    }
}

TEST(HConstant, SingularPencil)
{
    const auto pair = UnitaryPair::make(identity(3), identity(3), 1);
    EXPECT_THROW(h_constant(pair), numerical_error);
}

TEST(HConstant, JUnitaryAndEqualsPhiAtOne)
{
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto data = oracle::admissible_data(1 + s % 3, 1 + s % 4, 300 + s);
        const auto up = tau_map(data);
        const Matrix H = h_constant(up);
        const Matrix J = SignatureJ{data.p()}.matrix();
        EXPECT_LT((H.adjoint() * J * H - J).norm(), 1e-12 * std::max(1.0, H.squaredNorm()));
        EXPECT_LT((H - phi_eval(up, 1.0)).norm(), 1e-12 * std::max(1.0, H.norm()));
    }
    const auto zero = NudelmanData::make(random_output_normal_pair(2, 2, 4), Matrix::Zero(2, 2));
    const auto up0 = tau_map(zero);
    EXPECT_LT((h_constant(up0) - phi_eval(up0, 1.0)).norm(), 1e-12);
}

TEST(Phi, EqualsThetaTimesH)
{
    std::mt19937_64 e(6);
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto data = oracle::admissible_data(1 + s % 3, 1 + s % 4, 400 + s);
        const auto up = tau_map(data);
        const Matrix H = h_constant(up);
        for (int k = 0; k < 20; ++k) {
            const cplx z = exterior_point(e) * (k % 2 == 0 ? 1.0 : 0.5);
            EXPECT_LT((phi_eval(up, z) - theta_eval(data, z) * H).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Phi, ZeroParameterIsBlockDiagonal)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto pair = random_output_normal_pair(2, 1 + s % 3, 500 + s);
        const auto up = tau_map(NudelmanData::make(pair, Matrix::Zero(2, pair.degree())));
        const auto omega = omega_of_chart(pair);
        for (int k = 0; k < 8; ++k) {
            const cplx z = std::polar(1.0 + 0.2 * k, 0.9 * k + 0.3);
            Matrix expected = identity(4);
            expected.topLeftCorner(2, 2) = eval_transfer(omega, z);
            EXPECT_LT((phi_eval(up, z) - expected).norm(), 1e-12);
        }
    }
}

TEST(Phi, TwoPointKernelSign)
{
    // J - Phi(z) J Phi(l)* = (z conj(l) - 1) alpha (kv z - ku)^{-1} (kv l - ku)^{-*} alpha*
    std::mt19937_64 e(7);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto up = tau_map(oracle::admissible_data(2, 1 + s % 3, 600 + s));
        const Matrix J = SignatureJ{2}.matrix();
        const Matrix kv = up.kappa_v();
        const Matrix ku = up.kappa_u();
        const Matrix al = up.alpha();
        for (int k = 0; k < 5; ++k) {
            const cplx z = exterior_point(e);
            const cplx l = exterior_point(e);
            const Matrix lhs = J - phi_eval(up, z) * J * phi_eval(up, l).adjoint();
            const Matrix kernel = al * (kv * z - ku).inverse() * (kv * l - ku).inverse().adjoint() * al.adjoint();
            EXPECT_LT((lhs - (z * std::conj(l) - 1.0) * kernel).norm(), 1e-10 * std::max(1.0, lhs.norm()));
        }
    }
}

TEST(Lft, IdentityFactor)
{
    const auto R = random_lossless(2, 3, 1);
    const auto F = transfer_function(R);
    const auto I = JLosslessFactor::constant(identity(4));
    const cplx z(0.4, 1.3);
    EXPECT_LT((lft_apply(I, F, z) - F(z)).norm(), 1e-15);
}

TEST(Lft, Composition)
{
    const auto R = random_lossless(2, 3, 2);
    const auto th = JLosslessFactor::theta(oracle::admissible_data(2, 2, 700));
    const auto ps = JLosslessFactor::theta(oracle::admissible_data(2, 1, 701));
    for (const cplx z : oracle::near_circle_points(10, 3)) {
        const Matrix inner = lft(ps(z), eval_transfer(R, z));
        const Matrix lhs = lft(th(z), inner);
        const Matrix rhs = lft(th(z) * ps(z), eval_transfer(R, z));
        EXPECT_LT((lhs - rhs).norm(), 1e-10);
        EXPECT_LT((lhs - oracle::lft_explicit(th(z), inner)).norm(), 1e-10);
    }
}

TEST(Lft, LosslessPreserved)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto R = random_lossless(1 + s % 3, 1 + s % 4, s);
        const auto th = JLosslessFactor::theta(oracle::admissible_data(R.p(), 1 + s % 2, 800 + s));
        for (int k = 0; k < 8; ++k) {
            const cplx z = std::polar(1.0, 0.77 * k + 0.05);
            const Matrix G = lft_apply(th, transfer_function(R), z);
            EXPECT_LT((G * G.adjoint() - identity(R.p())).norm(), 1e-10);
        }
    }
}

TEST(Lft, SingularDenominator)
{
    // Theta = [[I, 0], [-I, I]] applied to F = I: denominator -I + I = 0
    Matrix th = identity(2);
    th(1, 0) = -1.0;
    EXPECT_THROW(lft(th, identity(1)), lft_singular_point);
}

TEST(IsJLossless, ThetaAndPhiPass)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto data = oracle::admissible_data(1 + s % 3, 1 + s % 3, 900 + s);
        EXPECT_TRUE(is_j_lossless(JLosslessFactor::theta(data), 20, s).passed);
        EXPECT_TRUE(is_j_lossless(JLosslessFactor::phi(tau_map(data)), 20, s).passed);
    }
}

TEST(IsJLossless, NonJUnitaryConstantFails)
{
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 2.0;
    H(1, 1) = 0.5;
    const auto rep = is_j_lossless(JLosslessFactor::constant(H), 8);
    EXPECT_FALSE(rep.passed);
    EXPECT_GT(rep.circle_residual, 1.0);
    EXPECT_THROW(is_j_lossless(JLosslessFactor::constant(H), 4), std::invalid_argument);
}

TEST(Equivariance, IdentityTransform)
{
    const auto data = oracle::admissible_data(2, 2, 1000);
    const auto same = equivariance_transform(data, identity(2), identity(2));
    EXPECT_EQ(same.U(), data.U());
    EXPECT_EQ(same.V(), data.V());
    EXPECT_THROW(equivariance_transform(data, 2.0 * identity(2), identity(2)), std::invalid_argument);
}

TEST(Equivariance, ThetaConjugation)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto data = oracle::admissible_data(2, 1 + s % 3, 1100 + s);
        const Matrix L = random_unitary(2, 2 * s);
        const Matrix Pi = random_unitary(2, 2 * s + 1);
        const auto moved = equivariance_transform(data, L, Pi);
        Matrix D = Matrix::Zero(4, 4);
        D.topLeftCorner(2, 2) = L;
        D.bottomRightCorner(2, 2) = Pi;
        for (const cplx z : oracle::near_circle_points(10, s)) {
            const Matrix lhs = D * theta_eval(data, z) * D.adjoint();
            EXPECT_LT((lhs - theta_eval(moved, z)).norm(), 1e-11 * std::max(1.0, lhs.norm()));
        }
    }
}

TEST(Equivariance, LftIdentity)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto R = random_lossless(2, 2, 40 + s);
        const auto data = oracle::admissible_data(2, 2, 1200 + s);
        const Matrix L = random_unitary(2, 3 * s);
        const Matrix Pi = random_unitary(2, 3 * s + 1);
        const auto moved = equivariance_transform(data, L, Pi);
        for (const cplx z : oracle::near_circle_points(10, 50 + s)) {
            const Matrix F = eval_transfer(R, z);
            const Matrix lhs = lft(theta_eval(moved, z), L * F * Pi.adjoint());
            const Matrix rhs = L * lft(theta_eval(data, z), F) * Pi.adjoint();
            EXPECT_LT((lhs - rhs).norm(), 1e-10);
        }
    }
}
