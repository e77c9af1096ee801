#pragma once

///
/// \file fit.hpp
///
/// Least-squares fit of a lossless function of fixed degree to point samples,
/// by BFGS over chart coordinates with central finite-difference gradients.
/// When the current chart degrades (quality below q_min) the iterate is
/// re-centered in its own adapted chart and the coordinates restart at zero.
///

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "atlas.hpp"
#include "io.hpp"

namespace lossless {

/// sum_k |G(z_k) - F_k|_F^2
inline double fit_objective(const BalancedRealization& R, const std::vector<cplx>& z,
                            const std::vector<Matrix>& F)
{
    double f = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        f += (eval_transfer(R, z[k]) - F[k]).squaredNorm();
    }
    return f;
}

/// Quality of a chart at a synthesized point: min_j lambda_min(P_j) for the
/// sequential atlases, 1/cond(Q) = sqrt(lambda_min / lambda_max)(P) for the
/// mutual one (the synthesized realization is in canonical form, Q = P^{1/2}).
inline double chart_quality(const SchurTrace& trace, AtlasKind kind)
{
    if (trace.steps.empty()) {
        return 1.0;
    }
    if (kind == AtlasKind::mutual) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(trace.steps.front().P.matrix(), Eigen::EigenvaluesOnly);
        return std::sqrt(es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff());
    }
    return trace.min_step_eigenvalue();
}

struct FitResult
{
    BalancedRealization realization;
    Chart chart;
    ChartCoordinates coordinates;
    double objective = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int chart_switches = 0;
    bool converged = false;
    std::string stop_reason;
    /// objective before and after each accepted step
    std::vector<std::pair<double, double>> steps;
};

using FitLogger = std::function<void(const std::string&)>;

namespace detail {

struct FitPoint
{
    double f = std::numeric_limits<double>::infinity();
    double quality = 0.0;
    BalancedRealization R;
};

class FitEngine
{
public:
    FitEngine(const io::FitProblem& prob, Chart chart) : prob_(prob), chart_(std::move(chart)) {}

    const Chart& chart() const { return chart_; }
    void set_chart(Chart c) { chart_ = std::move(c); }

    FitPoint eval(const Eigen::VectorXd& x) const
    {
        FitPoint pt;
        try {
            const SchurTrace trace = schur_synthesis(from_real_vector(x, chart_), chart_);
            pt.R = trace.result();
            pt.quality = chart_quality(trace, chart_.kind);
            pt.f = fit_objective(pt.R, prob_.z, prob_.F);
            if (!std::isfinite(pt.f)) {
                pt.f = std::numeric_limits<double>::infinity();
            }
        } catch (const error&) {
            pt.f = std::numeric_limits<double>::infinity();
        } catch (const std::invalid_argument&) {
            pt.f = std::numeric_limits<double>::infinity();
        }
        return pt;
    }

    double value(const Eigen::VectorXd& x) const { return eval(x).f; }

    /// Central differences with step h max(1, |x_i|); one-sided next to the
    /// boundary of the chart domain.
    Eigen::VectorXd gradient(const Eigen::VectorXd& x, double fx) const
    {
        Eigen::VectorXd g(x.size());
        for (Index i = 0; i < x.size(); ++i) {
            const double hi = prob_.h * std::max(1.0, std::abs(x(i)));
            Eigen::VectorXd xp = x;
            Eigen::VectorXd xm = x;
            xp(i) += hi;
            xm(i) -= hi;
            const double fp = value(xp);
            const double fm = value(xm);
            if (std::isfinite(fp) && std::isfinite(fm)) {
                g(i) = (fp - fm) / (2.0 * hi);
            } else if (std::isfinite(fp)) {
                g(i) = (fp - fx) / hi;
            } else if (std::isfinite(fm)) {
                g(i) = (fx - fm) / hi;
            } else {
                g(i) = 0.0;
            }
        }
        return g;
    }

private:
    const io::FitProblem& prob_;
    Chart chart_;
};

inline std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << std::scientific << x;
    return os.str();
}

} // namespace detail

/// Starting realization: the problem's "init" if given, otherwise a random
/// lossless function drawn from the problem seed.
inline BalancedRealization fit_initial_point(const io::FitProblem& prob)
{
    if (prob.init) {
        return *prob.init;
    }
    const bool real = prob.kind == AtlasKind::real;
    if (prob.n == 0) {
        return BalancedRealization::constant(random_unitary(prob.p, prob.seed, real));
    }
    return random_lossless(prob.p, prob.n, prob.seed, real);
}

inline FitResult fit(const io::FitProblem& prob, const FitLogger& log = {})
{
    prob.validate();
    const auto emit = [&](const std::string& line) {
        if (log) {
            log(line);
        }
    };

    const BalancedRealization start = fit_initial_point(prob);
    detail::FitEngine engine(prob, adapted_chart(start, prob.kind));
    const Index dim = coordinate_count(engine.chart());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    detail::FitPoint cur = engine.eval(x);
    if (!std::isfinite(cur.f)) {
        throw numerical_error("fit: objective is not finite at the initial point");
    }
    Eigen::VectorXd g = engine.gradient(x, cur.f);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim, dim);
    bool fresh = true; // H has not been updated since the last reset

    FitResult res;
    emit("event=start atlas=" + to_string(prob.kind) + " p=" + std::to_string(prob.p) +
         " n=" + std::to_string(prob.n) + " dim=" + std::to_string(dim) + " f=" + detail::fmt(cur.f));

    constexpr double max_step = 1.0;
    int stalls = 0;
    int iter = 0;
    for (; iter < prob.max_iters; ++iter) {
        if (cur.f < prob.target) {
            res.converged = true;
            res.stop_reason = "target";
            break;
        }
        Eigen::VectorXd d = -H * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            H.setIdentity();
            fresh = true;
            d = -g;
            slope = -g.squaredNorm();
        }
        if (slope == 0.0) {
            res.stop_reason = "zero-gradient";
            break;
        }
        // chart coordinates are O(1) near the chart center; cap the trial step
        const double dn = d.norm();
        if (dn > max_step) {
            d *= max_step / dn;
            slope *= max_step / dn;
        }

        // Armijo backtracking
        double t = 1.0;
        detail::FitPoint trial;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            trial = engine.eval(x + t * d);
            if (trial.f <= cur.f + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!fresh) {
                H.setIdentity();
                fresh = true;
                emit("event=reset iter=" + std::to_string(iter + 1));
                continue;
            }
            res.stop_reason = "stagnation";
            break;
        }

        const Eigen::VectorXd s = t * d;
        const Eigen::VectorXd x_new = x + s;
        const Eigen::VectorXd g_new = engine.gradient(x_new, trial.f);
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            if (fresh) {
                H *= sy / y.squaredNorm();
                fresh = false;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd Hy = H * y;
            H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
        }
        stalls = cur.f - trial.f <= 1e-14 * cur.f ? stalls + 1 : 0;
        res.steps.emplace_back(cur.f, trial.f);
        emit("iter=" + std::to_string(iter + 1) + " f=" + detail::fmt(trial.f) + " step=" + detail::fmt(t) +
             " grad=" + detail::fmt(g_new.norm()) + " quality=" + detail::fmt(trial.quality));
        x = x_new;
        cur = std::move(trial);
        g = g_new;
        if (stalls >= 3) {
            ++iter;
            res.stop_reason = "stagnation";
            break;
        }

        if (cur.quality < prob.q_min && cur.f >= prob.target) {
            // near the edge of the manifold the adapted chart can be unusable
            // at its own center; keep the old chart then
            const double q_old = cur.quality;
            Chart next;
            detail::FitPoint at_center;
            try {
                next = adapted_chart(cur.R, prob.kind);
                detail::FitEngine probe(prob, next);
                at_center = probe.eval(Eigen::VectorXd::Zero(dim));
            } catch (const std::exception& e) {
                emit("event=switch-rejected iter=" + std::to_string(iter + 1) + " reason=" + e.what());
                continue;
            }
            if (!std::isfinite(at_center.f)) {
                emit("event=switch-rejected iter=" + std::to_string(iter + 1) + " reason=center-out-of-domain");
                continue;
            }
            engine.set_chart(std::move(next));
            x.setZero();
            cur = std::move(at_center);
            g = engine.gradient(x, cur.f);
            H.setIdentity();
            fresh = true;
            ++res.chart_switches;
            emit("event=switch iter=" + std::to_string(iter + 1) + " quality=" + detail::fmt(q_old) +
                 " f=" + detail::fmt(cur.f));
        }
    }
    if (res.stop_reason.empty()) {
        if (cur.f < prob.target) {
            res.converged = true;
            res.stop_reason = "target";
        } else {
            res.stop_reason = "max-iters";
        }
    }
    res.iterations = iter;
    res.objective = cur.f;
    res.realization = cur.R;
    res.chart = engine.chart();
    res.coordinates = from_real_vector(x, engine.chart());
    emit("event=done iterations=" + std::to_string(iter) + " f=" + detail::fmt(cur.f) +
         " switches=" + std::to_string(res.chart_switches) + " reason=" + res.stop_reason);
    return res;
}

} // namespace lossless
