#pragma once

// JSON and CSV forms of the library's data types. Complex numbers are stored
// as [re, im] pairs; doubles use the shortest representation that round-trips.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "algebraic_bethe.hpp"
#include "bethe_equations.hpp"
#include "coordinate_bethe.hpp"
#include "hubbard_nested.hpp"
#include "sixvertex.hpp"
#include "spinchain_ed.hpp"
#include "thermodynamic_limit.hpp"

namespace bethe::io {

using Json = nlohmann::json;

/// Thrown for malformed or type-incompatible JSON input.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void expect(bool ok, const std::string& what)
{
    if (!ok) throw FormatError(what);
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

/// Accepts [re, im] or a plain number.
inline Complex complex_from_json(const Json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    expect(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(), "expected a complex number [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json complex_list_json(const std::vector<Complex>& v)
{
    Json a = Json::array();
    for (Complex z : v) a.push_back(complex_json(z));
    return a;
}

inline std::vector<Complex> complex_list_from_json(const Json& j)
{
    expect(j.is_array(), "expected a list of complex numbers");
    std::vector<Complex> v;
    for (const auto& e : j) v.push_back(complex_from_json(e));
    return v;
}

inline Json vector_json(const CVector& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v[i]));
    return a;
}

inline CVector vector_from_json(const Json& j)
{
    auto v = complex_list_from_json(j);
    return Eigen::Map<const CVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// A real number that may be infinite, written as the string "inf" / "-inf".
inline Json extended_real_json(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

inline double extended_real_from_json(const Json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw FormatError("expected a number or \"inf\", got \"" + s + "\"");
    }
    expect(j.is_number(), "expected a number or \"inf\"");
    return j.get<double>();
}

// matrices: {dim, format: "dense"|"coo", entries: [[row, col, re, im], ...]}

inline Json matrix_json(const SparseMatrix& m, const std::string& format = "coo")
{
    expect(format == "dense" || format == "coo", "matrix format must be dense or coo");
    Json entries = Json::array();
    if (format == "dense") {
        const CMatrix d(m);
        for (Eigen::Index r = 0; r < d.rows(); ++r)
            for (Eigen::Index c = 0; c < d.cols(); ++c) entries.push_back({r, c, d(r, c).real(), d(r, c).imag()});
    } else {
        std::vector<std::array<double, 4>> rows;
        for (int k = 0; k < m.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(m, k); it; ++it)
                rows.push_back({static_cast<double>(it.row()), static_cast<double>(it.col()), it.value().real(), it.value().imag()});
        std::sort(rows.begin(), rows.end());
        for (const auto& e : rows) entries.push_back({static_cast<Eigen::Index>(e[0]), static_cast<Eigen::Index>(e[1]), e[2], e[3]});
    }
    return {{"dim", m.rows()}, {"format", format}, {"entries", entries}};
}

inline Json matrix_json(const OperatorMatrix& m, const std::string& format = "coo") { return matrix_json(m.entries, format); }

inline SparseMatrix matrix_from_json(const Json& j)
{
    expect(j.is_object() && j.contains("dim") && j.contains("entries"), "matrix needs dim and entries");
    const auto dim = j.at("dim").get<Eigen::Index>();
    std::vector<Eigen::Triplet<Complex>> trip;
    for (const auto& e : j.at("entries")) {
        expect(e.is_array() && e.size() == 4, "matrix entries are [row, col, re, im]");
        const auto r = e[0].get<Eigen::Index>(), c = e[1].get<Eigen::Index>();
        expect(r >= 0 && r < dim && c >= 0 && c < dim, "matrix entry out of range");
        trip.emplace_back(r, c, Complex(e[2].get<double>(), e[3].get<double>()));
    }
    SparseMatrix m(dim, dim);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

inline std::string real_csv(double x)
{
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

/// `index,eigenvalue` table.
inline std::string spectrum_csv(const RVector& eigenvalues)
{
    std::string out = "index,eigenvalue\n";
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) out += std::to_string(i) + "," + real_csv(eigenvalues[i]) + "\n";
    return out;
}

// rapidities

inline Json params_json(const ModelParams& p)
{
    Json j = Json::object();
    if (p.gamma) j["gamma"] = *p.gamma;
    if (p.c) j["c"] = *p.c;
    if (p.u) j["u"] = *p.u;
    return j;
}

inline ModelParams params_from_json(const Json& j)
{
    ModelParams p;
    if (j.is_null()) return p;
    expect(j.is_object(), "params must be an object");
    if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
    if (j.contains("c")) p.c = j["c"].get<double>();
    if (j.contains("u")) p.u = j["u"].get<double>();
    return p;
}

inline Json rapidity_json(const RapiditySet& r)
{
    return {{"model", to_string(r.model)}, {"L", r.L}, {"N", r.N()}, {"values", complex_list_json(r.values)}, {"params", params_json(r.params)}};
}

inline RapiditySet rapidity_from_json(const Json& j)
{
    expect(j.is_object() && j.contains("L") && j.contains("values"), "rapidity set needs L and values");
    RapiditySet r;
    try {
        std::string m = j.value("model", std::string("XXX"));
        std::transform(m.begin(), m.end(), m.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        r.model = parse_model(m);
    } catch (const DomainError& e) {
        throw FormatError(e.what());
    }
    r.L = j.at("L").get<int>();
    r.values = complex_list_from_json(j.at("values"));
    if (j.contains("N") && !j.at("N").is_null()) expect(j.at("N").get<int>() == r.N(), "rapidity set: N does not match the number of values");
    r.params = params_from_json(j.value("params", Json()));
    return r;
}

inline Json solve_report_json(const SolveReport& s)
{
    return {{"model", to_string(s.roots.model)},
            {"L", s.roots.L},
            {"N", s.roots.N()},
            {"params", params_json(s.roots.params)},
            {"qnums", s.qnums.n},
            {"roots", complex_list_json(s.roots.values)},
            {"residual", s.residual},
            {"iterations", s.iterations},
            {"converged", s.converged}};
}

inline SolveReport solve_report_from_json(const Json& j)
{
    expect(j.is_object() && j.contains("L") && j.contains("roots"), "solve report needs L and roots");
    SolveReport s;
    Json rs = {{"model", j.value("model", std::string("XXX"))}, {"L", j.at("L")}, {"values", j.at("roots")}, {"params", j.value("params", Json())}};
    s.roots = rapidity_from_json(rs);
    s.qnums = QuantumNumbers{s.roots.L, s.roots.N(), j.value("qnums", std::vector<int>{})};
    s.residual = j.value("residual", 0.0);
    s.iterations = j.value("iterations", 0);
    s.converged = j.value("converged", false);
    return s;
}

/// Rapidities from either a RapiditySet (`values`) or a SolveReport (`roots`).
inline RapiditySet roots_from_json(const Json& j)
{
    auto present = [&](const char* k) { return j.is_object() && j.contains(k) && !j.at(k).is_null(); };
    if (present("values")) return rapidity_from_json(j);
    if (present("roots")) return solve_report_from_json(j).roots;
    throw FormatError("expected a rapidity set or a solve report");
}

// densities

inline Json density_json(const RootDensity& r)
{
    auto list = [](const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"q", extended_real_json(r.q)}, {"nodes", list(r.nodes)}, {"weights", list(r.weights)}, {"values", list(r.values)}};
}

inline RootDensity density_from_json(const Json& j)
{
    expect(j.is_object() && j.contains("nodes") && j.contains("weights") && j.contains("values"), "density needs nodes, weights, values");
    auto vec = [](const Json& a) {
        auto v = a.get<std::vector<double>>();
        return RVector(Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    RootDensity r;
    r.q = extended_real_from_json(j.value("q", Json("inf")));
    r.nodes = vec(j.at("nodes"));
    r.weights = vec(j.at("weights"));
    r.values = vec(j.at("values"));
    expect(r.nodes.size() == r.weights.size() && r.nodes.size() == r.values.size(), "density arrays differ in length");
    return r;
}

/// `L,sum,integral,gap` table.
inline std::string condensation_csv(const std::vector<CondensationRow>& rows)
{
    std::string out = "L,sum,integral,gap\n";
    for (const auto& r : rows)
        out += std::to_string(r.L) + "," + real_csv(r.sum) + "," + real_csv(r.integral) + "," + real_csv(r.gap) + "\n";
    return out;
}

// six-vertex

inline Json weights_json(const VertexWeights& w)
{
    if (w.is_parameterized())
        return {{"rho", complex_json(*w.rho)}, {"lambda", complex_json(*w.lambda)}, {"eta", complex_json(*w.eta)}, {"xi", complex_list_json(w.xi)}};
    return {{"a", complex_json(w.a)}, {"b", complex_json(w.b)}, {"c", complex_json(w.c)}};
}

/// {a, b, c} or {rho, lambda, eta, xi}; rho defaults to 1, lambda to 0.
inline VertexWeights weights_from_json(const Json& j)
{
    expect(j.is_object(), "weights must be an object");
    if (j.contains("eta")) {
        std::vector<Complex> xi = j.contains("xi") ? complex_list_from_json(j["xi"]) : std::vector<Complex>{};
        return VertexWeights::parameterized(j.contains("rho") ? complex_from_json(j["rho"]) : Complex{1.0},
                                            j.contains("lambda") ? complex_from_json(j["lambda"]) : Complex{0.0},
                                            complex_from_json(j["eta"]), xi);
    }
    expect(j.contains("a") && j.contains("b") && j.contains("c"), "weights need a, b, c or eta");
    return VertexWeights::direct(complex_from_json(j["a"]), complex_from_json(j["b"]), complex_from_json(j["c"]));
}

/// `L,logLambda_over_L` table.
inline std::string entropy_csv(const IceEntropy& e)
{
    std::string out = "L,logLambda_over_L\n";
    for (const auto& r : e.rows) out += std::to_string(r.L) + "," + real_csv(r.log_lambda_over_L) + "\n";
    return out;
}

// algebraic Bethe ansatz

inline Json slavnov_json(const SlavnovReport& r)
{
    Json j = {{"L", r.L}, {"N", r.mu.size()}, {"mu", complex_list_json(r.mu)}, {"lambda", complex_list_json(r.lambda)},
              {"slavnov", complex_json(r.slavnov)}};
    j["bruteforce"] = r.bruteforce ? complex_json(*r.bruteforce) : Json();
    j["rel_err"] = r.bruteforce ? Json(r.rel_err) : Json();
    return j;
}

// Hubbard

inline Json nested_roots_json(const NestedRoots& r)
{
    return {{"L", r.L}, {"N", r.N()}, {"M", r.M()}, {"u", r.u}, {"k", complex_list_json(r.k)}, {"lambda", complex_list_json(r.lambda)}};
}

inline NestedRoots nested_roots_from_json(const Json& j)
{
    expect(j.is_object() && j.contains("L") && j.contains("u") && j.contains("k"), "nested roots need L, u, k");
    NestedRoots r;
    r.L = j.at("L").get<int>();
    r.u = j.at("u").get<double>();
    r.k = complex_list_from_json(j.at("k"));
    r.lambda = j.contains("lambda") ? complex_list_from_json(j.at("lambda")) : std::vector<Complex>{};
    if (j.contains("N") && !j.at("N").is_null()) expect(j.at("N").get<int>() == r.N(), "nested roots: N does not match k");
    if (j.contains("M") && !j.at("M").is_null()) expect(j.at("M").get<int>() == r.M(), "nested roots: M does not match lambda");
    return r;
}

} // namespace bethe::io
