#pragma once

///
/// \file io.hpp
///
/// JSON files for matrices, realizations, charts, coordinates and fit problems.
///
/// A matrix is {"rows": r, "cols": c, "re": [[...]], "im": [[...]]} with
/// row-major nested arrays; a missing "im" means a real matrix.
///

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atlas.hpp"

namespace lossless::io {

using json = nlohmann::json;

namespace detail {

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline const json& member(const json& j, const std::string& key, const std::string& where)
{
    if (!j.is_object()) {
        throw parse_error(where + ": expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw parse_error(where + ": missing key \"" + key + "\"");
    }
    return *it;
}

inline double number(const json& j, const std::string& where)
{
    if (!j.is_number()) {
        throw parse_error(where + ": expected a number");
    }
    const double x = j.get<double>();
    if (!std::isfinite(x)) {
        throw parse_error(where + ": non-finite number");
    }
    return x;
}

inline Index count(const json& j, const std::string& where)
{
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw parse_error(where + ": expected a non-negative integer");
    }
    return static_cast<Index>(j.get<long long>());
}

inline Eigen::MatrixXd real_grid(const json& j, Index rows, Index cols, const std::string& where)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
        throw parse_error(where + ": expected " + std::to_string(rows) + " rows");
    }
    Eigen::MatrixXd out(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        const std::string rw = where + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw parse_error(rw + ": expected " + std::to_string(cols) + " entries");
        }
        for (Index c = 0; c < cols; ++c) {
            out(r, c) = number(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
        }
    }
    return out;
}

} // namespace detail

/// Reads a whole file and parses it, reporting syntax errors as
/// "path:line:column: message".
inline json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw parse_error(path + ": cannot open file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte);
        throw parse_error(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot open file for writing");
    }
    out << std::setprecision(17) << j.dump(2) << '\n';
}

inline json to_json(const Matrix& M)
{
    json re = json::array();
    json im = json::array();
    bool real = true;
    for (Index r = 0; r < M.rows(); ++r) {
        json rr = json::array();
        json ri = json::array();
        for (Index c = 0; c < M.cols(); ++c) {
            rr.push_back(M(r, c).real());
            ri.push_back(M(r, c).imag());
            real = real && M(r, c).imag() == 0.0;
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    json j = {{"rows", M.rows()}, {"cols", M.cols()}, {"re", std::move(re)}};
    if (!real) {
        j["im"] = std::move(im);
    }
    return j;
}

inline Matrix matrix_from_json(const json& j, const std::string& where = "matrix")
{
    const Index rows = detail::count(detail::member(j, "rows", where), where + ".rows");
    const Index cols = detail::count(detail::member(j, "cols", where), where + ".cols");
    Matrix M = detail::real_grid(detail::member(j, "re", where), rows, cols, where + ".re").cast<cplx>();
    if (j.contains("im")) {
        M += cplx(0.0, 1.0) * detail::real_grid(j.at("im"), rows, cols, where + ".im").cast<cplx>();
    }
    return M;
}

inline json to_json(const BalancedRealization& R)
{
    return {{"p", R.p()}, {"n", R.n()},         {"A", to_json(R.A)},
            {"B", to_json(R.B)}, {"C", to_json(R.C)}, {"D", to_json(R.D)}};
}

/// Parses a realization file; block shapes are checked but unitarity is not,
/// so that `verify` can report on damaged files.
inline BalancedRealization realization_from_json(const json& j)
{
    const Index p = detail::count(detail::member(j, "p", "realization"), "realization.p");
    const Index n = detail::count(detail::member(j, "n", "realization"), "realization.n");
    BalancedRealization R;
    R.A = n == 0 ? Matrix(0, 0) : matrix_from_json(detail::member(j, "A", "realization"), "A");
    R.B = n == 0 ? Matrix(0, p) : matrix_from_json(detail::member(j, "B", "realization"), "B");
    R.C = n == 0 ? Matrix(p, 0) : matrix_from_json(detail::member(j, "C", "realization"), "C");
    R.D = matrix_from_json(detail::member(j, "D", "realization"), "D");
    if (R.A.rows() != n || R.D.rows() != p) {
        throw parse_error("realization: blocks do not match p = " + std::to_string(p) +
                          ", n = " + std::to_string(n));
    }
    try {
        R.check_shapes();
    } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("realization: ") + e.what());
    }
    return R;
}

inline json to_json(const Chart& chart)
{
    json pairs = json::array();
    for (const auto& pr : chart.pairs) {
        pairs.push_back({{"U", to_json(pr.U())}, {"W", to_json(pr.W())}});
    }
    return {{"kind", to_string(chart.kind)}, {"pairs", std::move(pairs)}, {"base_ref", to_json(chart.base_ref)}};
}

inline Chart chart_from_json(const json& j)
{
    const json& kind = detail::member(j, "kind", "chart");
    if (!kind.is_string()) {
        throw parse_error("chart.kind: expected a string");
    }
    const json& pairs = detail::member(j, "pairs", "chart");
    if (!pairs.is_array()) {
        throw parse_error("chart.pairs: expected an array");
    }
    try {
        std::vector<OutputNormalPair> sigma;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const std::string where = "chart.pairs[" + std::to_string(i) + "]";
            sigma.push_back(OutputNormalPair::make(matrix_from_json(detail::member(pairs[i], "U", where), where + ".U"),
                                                   matrix_from_json(detail::member(pairs[i], "W", where), where + ".W")));
        }
        return Chart::make(atlas_kind_from_string(kind.get<std::string>()), std::move(sigma),
                           matrix_from_json(detail::member(j, "base_ref", "chart"), "chart.base_ref"));
    } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("chart: ") + e.what());
    }
}

inline json to_json(const ChartCoordinates& coords)
{
    json vs = json::array();
    for (const auto& V : coords.V) {
        vs.push_back(to_json(V));
    }
    return {{"V", std::move(vs)}, {"g0", std::vector<double>(coords.g0.data(), coords.g0.data() + coords.g0.size())}};
}

inline ChartCoordinates coordinates_from_json(const json& j)
{
    const json& vs = detail::member(j, "V", "coordinates");
    const json& g0 = detail::member(j, "g0", "coordinates");
    if (!vs.is_array() || !g0.is_array()) {
        throw parse_error("coordinates: \"V\" and \"g0\" must be arrays");
    }
    ChartCoordinates coords;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        coords.V.push_back(matrix_from_json(vs[i], "V[" + std::to_string(i) + "]"));
    }
    coords.g0.resize(static_cast<Index>(g0.size()));
    for (std::size_t i = 0; i < g0.size(); ++i) {
        coords.g0(static_cast<Index>(i)) = detail::number(g0[i], "g0[" + std::to_string(i) + "]");
    }
    return coords;
}

/// Samples (z_k, F_k) of a target function and optimizer settings.
struct FitProblem
{
    Index p = 1;
    Index n = 0;
    AtlasKind kind = AtlasKind::complex;
    std::vector<cplx> z;
    std::vector<Matrix> F;
    int max_iters = 500;
    double h = 1e-6;
    double q_min = 0.1;
    double target = 1e-13;
    std::uint64_t seed = 1;
    std::optional<BalancedRealization> init;

    void validate() const
    {
        if (z.size() != F.size() || z.empty()) {
            throw std::invalid_argument("fit problem: need at least one sample");
        }
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double r = std::abs(z[k]);
            if (!(r >= 1.0 - 1e-12 && r <= 10.0)) {
                throw std::invalid_argument("fit problem: |z_k| must lie in [1, 10]");
            }
            if (F[k].rows() != p || F[k].cols() != p) {
                throw std::invalid_argument("fit problem: F_k must be p x p");
            }
            for (std::size_t m = 0; m < k; ++m) {
                if (std::abs(z[k] - z[m]) < 1e-12) {
                    throw std::invalid_argument("fit problem: sample points must be distinct");
                }
            }
        }
        if (init && (init->p() != p || init->n() != n)) {
            throw std::invalid_argument("fit problem: init has the wrong size");
        }
        if (max_iters < 0 || !(h > 0.0) || !(q_min >= 0.0 && q_min <= 1.0)) {
            throw std::invalid_argument("fit problem: invalid optimizer settings");
        }
    }
};

inline json to_json(const FitProblem& fp)
{
    json samples = json::array();
    for (std::size_t k = 0; k < fp.z.size(); ++k) {
        samples.push_back({{"z", {fp.z[k].real(), fp.z[k].imag()}}, {"F", to_json(fp.F[k])}});
    }
    json j = {{"p", fp.p},
              {"n", fp.n},
              {"atlas", to_string(fp.kind)},
              {"samples", std::move(samples)},
              {"max_iters", fp.max_iters},
              {"h", fp.h},
              {"q_min", fp.q_min},
              {"target", fp.target},
              {"seed", fp.seed}};
    if (fp.init) {
        j["init"] = to_json(*fp.init);
    }
    return j;
}

inline FitProblem fit_problem_from_json(const json& j)
{
    FitProblem fp;
    fp.p = detail::count(detail::member(j, "p", "problem"), "problem.p");
    fp.n = detail::count(detail::member(j, "n", "problem"), "problem.n");
    if (j.contains("atlas")) {
        try {
            fp.kind = atlas_kind_from_string(j.at("atlas").get<std::string>());
        } catch (const std::exception& e) {
            throw parse_error(std::string("problem.atlas: ") + e.what());
        }
    }
    const json& samples = detail::member(j, "samples", "problem");
    if (!samples.is_array()) {
        throw parse_error("problem.samples: expected an array");
    }
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const std::string where = "problem.samples[" + std::to_string(k) + "]";
        const json& z = detail::member(samples[k], "z", where);
        if (!z.is_array() || z.size() != 2) {
            throw parse_error(where + ".z: expected [re, im]");
        }
        fp.z.emplace_back(detail::number(z[0], where + ".z"), detail::number(z[1], where + ".z"));
        fp.F.push_back(matrix_from_json(detail::member(samples[k], "F", where), where + ".F"));
    }
    if (j.contains("max_iters")) fp.max_iters = static_cast<int>(detail::count(j.at("max_iters"), "problem.max_iters"));
    if (j.contains("h")) fp.h = detail::number(j.at("h"), "problem.h");
    if (j.contains("q_min")) fp.q_min = detail::number(j.at("q_min"), "problem.q_min");
    if (j.contains("target")) fp.target = detail::number(j.at("target"), "problem.target");
    if (j.contains("seed")) fp.seed = static_cast<std::uint64_t>(detail::count(j.at("seed"), "problem.seed"));
    if (j.contains("init")) fp.init = realization_from_json(j.at("init"));
    try {
        fp.validate();
    } catch (const std::invalid_argument& e) {
        throw parse_error(e.what());
    }
    return fp;
}

} // namespace lossless::io
