// Fits a degree-3 lossless function to 32 circle samples of a random target.
// The start is the target moved away along random chart directions; cold
// starts can end in local minima of the least-squares objective.

#include <cmath>
#include <iostream>
#include <random>

#include <lossless/lossless.hpp>

int main()
{
    using namespace lossless;
    const BalancedRealization target = random_lossless(1, 3, 42);

    io::FitProblem prob;
    prob.p = 1;
    prob.n = 3;
    prob.seed = 7;
    for (int k = 0; k < 32; ++k) {
        prob.z.push_back(std::polar(1.0, 2.0 * std::acos(-1.0) * (k + 0.5) / 32.0));
        prob.F.push_back(eval_transfer(target, prob.z.back()));
    }

    const Chart chart = adapted_chart(target, AtlasKind::complex);
    const Eigen::VectorXd center = to_real_vector(analyze(target, chart), chart);
    std::mt19937_64 rng(prob.seed);
    std::normal_distribution<double> nd(0.0, 0.3);
    while (!prob.init) {
        Eigen::VectorXd x = center;
        for (Index i = 0; i < x.size(); ++i) {
            x(i) += nd(rng);
        }
        try {
            prob.init = synthesize(from_real_vector(x, chart), chart);
        } catch (const domain_error&) {
            // outside the chart; draw again
        }
    }

    const FitResult r = fit(prob, [](const std::string& line) { std::cout << line << '\n'; });
    std::cout << "converged=" << (r.converged ? "yes" : "no") << " objective=" << r.objective << '\n';
    return r.converged ? 0 : 1;
}
