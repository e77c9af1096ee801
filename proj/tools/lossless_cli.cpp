// lossless: command-line front end for the lossless-function library.
//
// Exit codes: 0 success, 1 usage or precondition error, 2 out of chart domain,
// 3 parse error, 4 numerical failure (including failed verification).

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <lossless/lossless.hpp>

namespace {

using namespace lossless;

struct Options
{
    std::string atlas = "complex";
    std::uint64_t seed = 1;
    bool seed_given = false;
    double tol = 1e-10;
    int samples = 64;
    bool real = false;
    std::string out;
};

void emit_json(const io::json& j, const std::string& out)
{
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        io::write_json(out, j);
    }
}

void kv(const std::string& key, double value)
{
    std::cout << key << '=' << value << '\n';
}

int cmd_random(const Options& o, Index p, Index n)
{
    const BalancedRealization R = n == 0 ? BalancedRealization::constant(random_unitary(p, o.seed, o.real))
                                         : random_lossless(p, n, o.seed, o.real);
    emit_json(io::to_json(R), o.out);
    return 0;
}

int cmd_verify(const Options& o, const std::string& file)
{
    const BalancedRealization R = io::realization_from_json(io::read_json(file));
    const double unit = unitarity_residual(R);
    const double rho = R.n() == 0 ? 0.0 : spectral_radius(R.A);
    double circle = 0.0;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (int k = 0; k < o.samples; ++k) {
        // offset by half a step so that no sample sits at z = 1
        const cplx z = std::polar(1.0, two_pi * (k + 0.5) / o.samples);
        try {
            const Matrix G = eval_transfer(R, z);
            circle = std::max(circle, (G * G.adjoint() - identity(R.p())).norm());
        } catch (const numerical_error&) {
            circle = std::numeric_limits<double>::infinity();
        }
    }
    const Index deg = degree(R);
    std::cout << "p=" << R.p() << "\nn=" << R.n() << '\n';
    kv("unitarity_residual", unit);
    kv("circle_residual", circle);
    kv("spectral_radius", rho);
    std::cout << "degree=" << deg << '\n';
    bool ok = true;
    if (!(unit <= o.tol)) {
        std::cout << "failure=unitarity\n";
        ok = false;
    }
    if (!(circle <= o.tol)) {
        std::cout << "failure=circle\n";
        ok = false;
    }
    if (!(rho < 1.0)) {
        std::cout << "failure=unstable\n";
        ok = false;
    }
    if (deg < R.n()) {
        std::cout << "warning=degree-deficient\n";
    }
    std::cout << "status=" << (ok ? "ok" : "fail") << '\n';
    return ok ? 0 : 4;
}

double max_parameter_norm(const ChartCoordinates& c)
{
    double m = 0.0;
    for (const auto& V : c.V) {
        m = std::max(m, V.norm());
    }
    return m;
}

int cmd_adapt(const Options& o, const std::string& file)
{
    const BalancedRealization R = io::realization_from_json(io::read_json(file));
    const Chart chart = adapted_chart(R, atlas_kind_from_string(o.atlas));
    const ChartCoordinates c = analyze(R, chart);
    emit_json(io::to_json(chart), o.out);
    const double m = max_parameter_norm(c);
    std::cerr << "atlas=" << o.atlas << "\nsteps=" << chart.pairs.size() << "\nmax_parameter=" << m
              << "\ng0_coordinate=" << (c.g0.size() ? c.g0.norm() : 0.0) << '\n';
    if (!(m <= 1e-9)) {
        std::cerr << "failure=nonzero-parameters\n";
        return 4;
    }
    return 0;
}

int cmd_analyze(const Options& o, const std::string& rfile, const std::string& cfile)
{
    const BalancedRealization R = io::realization_from_json(io::read_json(rfile));
    const Chart chart = io::chart_from_json(io::read_json(cfile));
    emit_json(io::to_json(analyze(R, chart)), o.out);
    return 0;
}

int cmd_synth(const Options& o, const std::string& cfile, const std::string& xfile)
{
    const Chart chart = io::chart_from_json(io::read_json(cfile));
    const ChartCoordinates x = io::coordinates_from_json(io::read_json(xfile));
    emit_json(io::to_json(synthesize(x, chart)), o.out);
    return 0;
}

int cmd_fit(const Options& o, const std::string& file)
{
    io::FitProblem prob = io::fit_problem_from_json(io::read_json(file));
    if (o.seed_given) {
        prob.seed = o.seed;
    }
    const FitResult r = fit(prob, [](const std::string& line) { std::cout << line << '\n'; });
    if (!o.out.empty()) {
        io::write_json(o.out, io::to_json(r.realization));
    }
    return r.converged ? 0 : 4;
}

int cmd_potapov(const Options& o, const std::string& file)
{
    const BalancedRealization R = io::realization_from_json(io::read_json(file));
    const PotapovFactorization pf = potapov_factorize(R, atlas_kind_from_string(o.atlas));
    double residual = 0.0;
    for (int k = 0; k < 20; ++k) {
        const cplx z = std::polar(1.0 + 0.05 * k, 0.7 + 0.31 * k);
        residual = std::max(residual, (pf.eval(z) - eval_transfer(R, z)).norm());
    }
    std::cout << "factors=" << pf.factors.size() << '\n';
    for (std::size_t j = 0; j < pf.factors.size(); ++j) {
        std::cout << "factor" << j << "_degree=" << pf.factors[j].n() << '\n';
        if (!o.out.empty()) {
            io::write_json(o.out + ".factor" + std::to_string(j) + ".json", io::to_json(pf.factors[j]));
        }
    }
    if (!o.out.empty()) {
        io::write_json(o.out + ".g0.json", io::to_json(pf.g0));
    }
    kv("product_residual", residual);
    return residual <= 1e-9 ? 0 : 4;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Parametrization of discrete-time lossless transfer functions"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--atlas", o.atlas, "Atlas kind: complex, real or mutual")
        ->check(CLI::IsMember({"complex", "real", "mutual"}));
    auto* seed_opt = app.add_option("--seed", o.seed, "Random seed");
    app.add_option("--tol", o.tol, "Verification tolerance");
    app.add_option("--samples", o.samples, "Number of circle samples")->check(CLI::PositiveNumber);
    app.add_flag("--real", o.real, "Generate real-entried data");
    app.add_option("--out", o.out, "Output path (default: stdout)");
    app.fallthrough();

    Index p = 1;
    Index n = 1;
    std::string f1;
    std::string f2;

    auto* random = app.add_subcommand("random", "Write a random balanced realization");
    random->add_option("p", p, "Output dimension")->required()->check(CLI::PositiveNumber);
    random->add_option("n", n, "McMillan degree")->required()->check(CLI::NonNegativeNumber);

    auto* verify = app.add_subcommand("verify", "Report unitarity, losslessness and degree");
    verify->add_option("realization", f1)->required();

    auto* adapt = app.add_subcommand("adapt", "Compute the adapted chart of a realization");
    adapt->add_option("realization", f1)->required();

    auto* an = app.add_subcommand("analyze", "Schur parameters of a realization in a chart");
    an->add_option("realization", f1)->required();
    an->add_option("chart", f2)->required();

    auto* synth = app.add_subcommand("synth", "Realization from chart coordinates");
    synth->add_option("chart", f1)->required();
    synth->add_option("coordinates", f2)->required();

    auto* fitc = app.add_subcommand("fit", "Fit a lossless function to samples");
    fitc->add_option("problem", f1)->required();

    auto* pot = app.add_subcommand("potapov", "Potapov factorization of a realization");
    pot->add_option("realization", f1)->required();

    for (auto* sc : {random, verify, adapt, an, synth, fitc, pot}) {
        sc->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);
    o.seed_given = seed_opt->count() > 0;

    try {
        if (*random) return cmd_random(o, p, n);
        if (*verify) return cmd_verify(o, f1);
        if (*adapt) return cmd_adapt(o, f1);
        if (*an) return cmd_analyze(o, f1, f2);
        if (*synth) return cmd_synth(o, f1, f2);
        if (*fitc) return cmd_fit(o, f1);
        if (*pot) return cmd_potapov(o, f1);
    } catch (const domain_error& e) {
        std::cerr << "error=out-of-domain step=" << e.step() << " min_eigenvalue=" << e.min_eigenvalue()
                  << "\nmessage=" << e.what() << '\n';
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "error=parse\nmessage=" << e.what() << '\n';
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "error=numerical\nmessage=" << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error=usage\nmessage=" << e.what() << '\n';
        return 1;
    }
    return 1;
}
