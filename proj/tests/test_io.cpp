#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"

using namespace lossless;
namespace fs = std::filesystem;

namespace {

class TempDir
{
public:
    TempDir()
        : path_(fs::temp_directory_path() /
                ("lossless_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++)))
    {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static int& counter()
    {
        static int c = 0;
        return c;
    }
    fs::path path_;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
}

#ifdef LOSSLESS_CLI_PATH
struct Run
{
    int code;
    std::string out;
    std::string err;
};

Run cli(const TempDir& dir, const std::string& args)
{
    const std::string out = dir.file("stdout.txt");
    const std::string err = dir.file("stderr.txt");
    const std::string cmd = std::string(LOSSLESS_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

/// Value of a "key=value" line, or "" when absent.
std::string value_of(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + "=", 0) == 0) {
            return line.substr(key.size() + 1);
        }
    }
    return "";
}
#endif

} // namespace

TEST(Json, MatrixRoundtrip)
{
    const Matrix M = random_unitary(3, 1);
    EXPECT_EQ(io::matrix_from_json(io::to_json(M)), M);
    const Matrix R = random_unitary(3, 1, true);
    const auto j = io::to_json(R);
    EXPECT_FALSE(j.contains("im"));
    EXPECT_EQ(io::matrix_from_json(j), R);
    EXPECT_EQ(io::matrix_from_json(io::to_json(Matrix(0, 2))).cols(), 2);
}

TEST(Json, MatrixErrors)
{
    using io::json;
    EXPECT_THROW(io::matrix_from_json(json{{"rows", 1}, {"cols", 2}, {"re", {{1.0}}}}), parse_error);
    EXPECT_THROW(io::matrix_from_json(json{{"rows", 1}, {"cols", 1}}), parse_error);
    EXPECT_THROW(io::matrix_from_json(json{{"rows", -1}, {"cols", 1}, {"re", json::array()}}), parse_error);
    EXPECT_THROW(io::matrix_from_json(json{{"rows", 1}, {"cols", 1}, {"re", {{"x"}}}}), parse_error);
}

TEST(Json, RealizationChartCoordinatesRoundtrip)
{
    const auto R = random_lossless(2, 4, 3);
    const auto R2 = io::realization_from_json(io::to_json(R));
    EXPECT_EQ(R2.realization_matrix(), R.realization_matrix());
    const auto C = BalancedRealization::constant(random_unitary(2, 4));
    EXPECT_EQ(io::realization_from_json(io::to_json(C)).D, C.D);

    for (const auto kind : {AtlasKind::complex, AtlasKind::real, AtlasKind::mutual}) {
        const auto chart = adapted_chart(random_lossless(2, 3, 5, kind == AtlasKind::real), kind);
        const auto back = io::chart_from_json(io::to_json(chart));
        EXPECT_EQ(back.kind, chart.kind);
        ASSERT_EQ(back.pairs.size(), chart.pairs.size());
        for (std::size_t j = 0; j < chart.pairs.size(); ++j) {
            EXPECT_EQ(back.pairs[j].U(), chart.pairs[j].U());
            EXPECT_EQ(back.pairs[j].W(), chart.pairs[j].W());
        }
        const auto coords = oracle::random_coordinates(chart, 6);
        const auto cb = io::coordinates_from_json(io::to_json(coords));
        EXPECT_EQ(to_real_vector(cb, chart), to_real_vector(coords, chart));
    }
}

TEST(Json, RealizationShapeErrors)
{
    auto j = io::to_json(random_lossless(2, 3, 1));
    j["n"] = 4;
    EXPECT_THROW(io::realization_from_json(j), parse_error);
    j = io::to_json(random_lossless(2, 3, 1));
    j["B"] = io::to_json(Matrix::Zero(3, 3));
    EXPECT_THROW(io::realization_from_json(j), parse_error);
}

TEST(Json, ChartValidation)
{
    auto j = io::to_json(adapted_chart_complex(random_lossless(2, 2, 1)));
    j["kind"] = "hyperbolic";
    EXPECT_THROW(io::chart_from_json(j), parse_error);
    j = io::to_json(adapted_chart_complex(random_lossless(2, 2, 1)));
    j["pairs"][0]["W"] = io::to_json(Matrix::Constant(1, 1, 2.0));
    EXPECT_THROW(io::chart_from_json(j), parse_error);
}

TEST(Json, FitProblemRoundtrip)
{
    io::FitProblem fp;
    fp.p = 1;
    fp.n = 1;
    fp.kind = AtlasKind::mutual;
    fp.z = {cplx(1.0, 0.0), cplx(0.0, 2.0)};
    fp.F = {identity(1), -identity(1)};
    fp.q_min = 0.25;
    fp.init = random_lossless(1, 1, 2);
    const auto back = io::fit_problem_from_json(io::to_json(fp));
    EXPECT_EQ(back.kind, fp.kind);
    EXPECT_EQ(back.z, fp.z);
    EXPECT_EQ(back.F, fp.F);
    EXPECT_EQ(back.q_min, fp.q_min);
    ASSERT_TRUE(back.init.has_value());
    EXPECT_EQ(back.init->A, fp.init->A);
}

TEST(Json, SyntaxErrorsCarryLineAndColumn)
{
    TempDir dir;
    const auto path = dir.file("bad.json");
    spit(path, "{\n  \"p\": 1,\n  \"n\": ]\n}\n");
    try {
        io::read_json(path);
        FAIL() << "expected a parse error";
    } catch (const parse_error& e) {
        EXPECT_NE(std::string(e.what()).find(path + ":3:8"), std::string::npos) << e.what();
    }
    EXPECT_THROW(io::read_json(dir.file("missing.json")), parse_error);
}

#ifdef LOSSLESS_CLI_PATH
TEST(Cli, RandomIsDeterministicAndVerifies)
{
    TempDir dir;
    const auto a = dir.file("a.json");
    const auto b = dir.file("b.json");
    EXPECT_EQ(cli(dir, "random 2 8 --seed 7 --out " + a).code, 0);
    EXPECT_EQ(cli(dir, "random 2 8 --seed 7 --out " + b).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const auto v = cli(dir, "verify " + a);
    EXPECT_EQ(v.code, 0) << v.out << v.err;
    EXPECT_EQ(value_of(v.out, "status"), "ok");
    EXPECT_EQ(value_of(v.out, "degree"), "8");
    EXPECT_LT(std::stod(value_of(v.out, "unitarity_residual")), 1e-10);
    EXPECT_LT(std::stod(value_of(v.out, "circle_residual")), 1e-10);

    const auto r = dir.file("r.json");
    EXPECT_EQ(cli(dir, "random 2 3 --real --seed 2 --out " + r).code, 0);
    const auto R = io::realization_from_json(io::read_json(r));
    EXPECT_EQ(oracle::max_imag_realization(R), 0.0);
}

TEST(Cli, VerifyFlagsDamage)
{
    TempDir dir;
    const auto f = dir.file("r.json");
    auto R = random_lossless(2, 3, 1);
    R.A(0, 0) += 0.1;
    io::write_json(f, io::to_json(R));
    const auto v = cli(dir, "verify " + f);
    EXPECT_EQ(v.code, 4);
    EXPECT_EQ(value_of(v.out, "failure"), "unitarity");
    EXPECT_EQ(value_of(v.out, "status"), "fail");

    // unitary realization whose last state is unobservable and unreachable
    const auto G = random_lossless(2, 2, 3);
    BalancedRealization padded;
    padded.A = Matrix::Zero(3, 3);
    padded.A.topLeftCorner(2, 2) = G.A;
    padded.A(2, 2) = 1.0;
    padded.B = Matrix::Zero(3, 2);
    padded.B.topRows(2) = G.B;
    padded.C = Matrix::Zero(2, 3);
    padded.C.leftCols(2) = G.C;
    padded.D = G.D;
    io::write_json(f, io::to_json(padded));
    const auto w = cli(dir, "verify " + f);
    EXPECT_EQ(value_of(w.out, "warning"), "degree-deficient");
    EXPECT_EQ(value_of(w.out, "degree"), "2");
}

TEST(Cli, AdaptAnalyzeSynthRoundtrip)
{
    TempDir dir;
    for (const std::string atlas : {"complex", "real", "mutual"}) {
        const auto r = dir.file("r.json");
        const auto c = dir.file("c.json");
        const auto x = dir.file("x.json");
        const auto s = dir.file("s.json");
        ASSERT_EQ(cli(dir, "random 2 4 --real --seed 5 --out " + r).code, 0);
        const auto ad = cli(dir, "adapt " + r + " --atlas " + atlas + " --out " + c);
        EXPECT_EQ(ad.code, 0) << ad.err;
        EXPECT_LT(std::stod(value_of(ad.err, "max_parameter")), 1e-9);

        // move away from the chart center, then analyze and synthesize
        const auto chart = io::chart_from_json(io::read_json(c));
        const auto coords = oracle::random_coordinates(chart, 8, 0.3);
        const auto R = synthesize(coords, chart);
        io::write_json(r, io::to_json(R));
        ASSERT_EQ(cli(dir, "analyze " + r + " " + c + " --out " + x).code, 0);
        ASSERT_EQ(cli(dir, "synth " + c + " " + x + " --out " + s).code, 0);
        EXPECT_LT(oracle::transfer_distance(io::realization_from_json(io::read_json(s)), R), 1e-9);
    }
}

TEST(Cli, ExitCodes)
{
    TempDir dir;
    const auto bad = dir.file("bad.json");
    spit(bad, "{ \"p\": 1,");
    const auto parse = cli(dir, "verify " + bad);
    EXPECT_EQ(parse.code, 3);
    EXPECT_NE(parse.err.find("bad.json:1:"), std::string::npos) << parse.err;

    // Q = 0: the chart pair only sees the constant output direction
    const auto r = dir.file("r.json");
    const auto c = dir.file("c.json");
    const double a = 0.4;
    BalancedRealization G;
    G.A = Matrix::Constant(1, 1, a);
    G.B = Matrix::Zero(1, 2);
    G.B(0, 0) = std::sqrt(1.0 - a * a);
    G.C = G.B.transpose();
    G.D = identity(2);
    G.D(0, 0) = -a;
    io::write_json(r, io::to_json(G));
    Matrix u = Matrix::Zero(2, 1);
    u(1, 0) = std::sqrt(0.75);
    io::write_json(c, io::to_json(Chart::make(AtlasKind::complex,
                                              {OutputNormalPair::make(u, Matrix::Constant(1, 1, 0.5))}, identity(2))));
    const auto dom = cli(dir, "analyze " + r + " " + c);
    EXPECT_EQ(dom.code, 2);
    EXPECT_NE(dom.err.find("step=1"), std::string::npos);

    io::write_json(c, io::to_json(adapted_chart_complex(random_lossless(2, 2, 1))));
    EXPECT_EQ(cli(dir, "analyze " + r + " " + c).code, 1);
    EXPECT_NE(cli(dir, "frobnicate").code, 0);
    ASSERT_EQ(cli(dir, "random 2 2 --out " + r).code, 0);
    EXPECT_EQ(cli(dir, "adapt " + r + " --atlas real").code, 1);
}

TEST(Cli, Potapov)
{
    TempDir dir;
    const auto r = dir.file("r.json");
    ASSERT_EQ(cli(dir, "random 2 3 --real --seed 4 --out " + r).code, 0);
    const auto out = dir.file("pot");
    const auto p = cli(dir, "potapov " + r + " --atlas real --out " + out);
    EXPECT_EQ(p.code, 0) << p.err;
    EXPECT_LT(std::stod(value_of(p.out, "product_residual")), 1e-9);
    const int factors = std::stoi(value_of(p.out, "factors"));
    Index total = 0;
    for (int j = 0; j < factors; ++j) {
        const auto f = io::realization_from_json(io::read_json(out + ".factor" + std::to_string(j) + ".json"));
        EXPECT_EQ(oracle::max_imag_realization(f), 0.0);
        total += f.n();
    }
    EXPECT_EQ(total, 3);
    EXPECT_TRUE(fs::exists(out + ".g0.json"));

    ASSERT_EQ(cli(dir, "random 1 1 --out " + r).code, 0);
    EXPECT_EQ(value_of(cli(dir, "potapov " + r).out, "factors"), "1");
}

TEST(Cli, FitSmallProblem)
{
    TempDir dir;
    const auto target = random_lossless(1, 2, 12);
    io::FitProblem prob;
    prob.p = 1;
    prob.n = 2;
    for (int k = 0; k < 16; ++k) {
        prob.z.push_back(std::polar(1.0, 2.0 * M_PI * (k + 0.5) / 16));
        prob.F.push_back(eval_transfer(target, prob.z.back()));
    }
    const auto chart = adapted_chart_complex(target);
    auto coords = analyze(target, chart);
    coords.V[0](0, 0) += 0.05;
    coords.V[1](0, 0) -= 0.05;
    prob.init = synthesize(coords, chart);
    const auto pf = dir.file("problem.json");
    const auto res = dir.file("fit.json");
    io::write_json(pf, io::to_json(prob));
    const auto run = cli(dir, "fit " + pf + " --out " + res);
    EXPECT_EQ(run.code, 0) << run.out << run.err;
    EXPECT_EQ(run.out.rfind("event=start", 0), 0u);
    EXPECT_NE(run.out.find("reason=target"), std::string::npos);
    const auto R = io::realization_from_json(io::read_json(res));
    EXPECT_LT(fit_objective(R, prob.z, prob.F), 1e-12);
    // the logged objective never increases
    std::istringstream in(run.out);
    std::string line;
    double last = std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        if (line.rfind("iter=", 0) != 0) {
            continue;
        }
        const auto pos = line.find(" f=");
        const double f = std::stod(line.substr(pos + 3));
        EXPECT_LE(f, last);
        last = f;
    }
}
#endif
