// Builds a lossless function from Schur parameters in a random chart, then
// recovers the parameters and factors the function.

#include <iostream>

#include <lossless/lossless.hpp>

int main()
{
    using namespace lossless;
    const Index p = 2;
    const Index n = 4;

    // chart: four degree-one pairs around a random base point
    std::vector<OutputNormalPair> pairs;
    for (Index j = 0; j < n; ++j) {
        pairs.push_back(random_output_normal_pair(p, 1, 10 + j));
    }
    const Chart chart = Chart::make(AtlasKind::complex, pairs, random_unitary(p, 3));

    ChartCoordinates coords = zero_coordinates(chart);
    for (auto& V : coords.V) {
        V = 0.1 * Matrix::Ones(p, 1);
    }
    const BalancedRealization R = synthesize(coords, chart);
    std::cout << "degree=" << degree(R) << " unitarity_residual=" << unitarity_residual(R) << '\n';

    const ChartCoordinates back = analyze(R, chart);
    double err = 0.0;
    for (std::size_t j = 0; j < coords.V.size(); ++j) {
        err = std::max(err, (back.V[j] - coords.V[j]).norm());
    }
    std::cout << "parameter_roundtrip_error=" << err << '\n';

    // in its own adapted chart every parameter vanishes
    const Chart adapted = adapted_chart_complex(R);
    double m = 0.0;
    for (const auto& V : analyze(R, adapted).V) {
        m = std::max(m, V.norm());
    }
    std::cout << "adapted_max_parameter=" << m << '\n';

    const PotapovFactorization fac = potapov_factorize(R, AtlasKind::complex);
    const cplx z(0.3, 1.2);
    std::cout << "factors=" << fac.factors.size()
              << " product_residual=" << (fac.eval(z) - eval_transfer(R, z)).norm() << '\n';
    return 0;
}
