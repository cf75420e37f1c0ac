#pragma once

// Experiment runner behind the bethe_lab command line: a table of commands,
// each with named parameters and defaults, and `run` which executes one
// ExperimentConfig into a deterministic JSON report, a text summary, and
// optional table artifacts.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "io.hpp"

namespace bethe::cli {

using io::Json;

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_no_convergence = 3, exit_invariant = 4 };

/// Invalid configuration (unknown command, bad parameter type or value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver did not converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string command;           // e.g. "vertex ice-entropy"
    Json params = Json::object();  // overrides of the command's defaults
    std::uint64_t seed = 1;
    std::string out;               // artifact directory, empty for none
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline Json config_json(const ExperimentConfig& c)
{
    return {{"command", c.command}, {"params", c.params}, {"seed", c.seed}, {"out", c.out}};
}

inline ExperimentConfig config_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("command")) throw ConfigError("config needs a command");
    ExperimentConfig c;
    c.command = j.at("command").get<std::string>();
    c.params = j.value("params", Json::object());
    if (!c.params.is_object()) throw ConfigError("config params must be an object");
    c.seed = j.value("seed", std::uint64_t{1});
    c.out = j.value("out", std::string());
    return c;
}

/// Parameters from a JSON file given to a command: a full config (its params),
/// the report of another command (its result, so outputs pipe into inputs),
/// or a bare parameter object.
inline Json params_from_file(const Json& j)
{
    if (!j.is_object()) throw ConfigError("JSON input must be an object");
    if (j.contains("command") && j.contains("params")) return j.at("params");
    if (j.contains("result") && j.at("result").is_object()) return j.at("result");
    return j;
}

struct ParamSpec {
    std::string name;
    Json fallback;
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
};

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool boolean = false; // pass/fail only; value and tolerance are not meaningful
};

struct RunResult {
    int exit_code = exit_ok;
    Json report;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> artifacts; // file name, contents
};

/// Worker count: BETHE_LAB_THREADS when set to a positive integer, else the hardware count.
inline unsigned thread_cap()
{
    unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BETHE_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return hw;
}

/// Run f(i) for i in [0, n) on up to thread_cap() threads; results are stored by index.
template <typename T>
std::vector<T> parallel_trials(int n, const std::function<T(int)>& f)
{
    std::vector<T> out(static_cast<std::size_t>(std::max(n, 0)));
    const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max(n, 1)));
    std::vector<std::exception_ptr> errors(workers);
    auto body = [&](unsigned w) {
        try {
            for (int i = static_cast<int>(w); i < n; i += static_cast<int>(workers)) out[static_cast<std::size_t>(i)] = f(i);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers <= 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

/// Per-trial generator: independent of scheduling, fixed by (seed, trial).
inline std::mt19937_64 trial_rng(std::uint64_t seed, int trial)
{
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(s);
}

inline Complex random_complex(std::mt19937_64& rng, double radius)
{
    std::uniform_real_distribution<double> u(-radius, radius);
    const double re = u(rng);
    return {re, u(rng)};
}

/// State of one run: merged parameters, checks, result object and artifacts.
class Context {
public:
    Context(Json params, std::uint64_t seed) : params_(std::move(params)), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    const Json& params() const { return params_; }
    bool has(const std::string& k) const { return params_.contains(k) && !params_.at(k).is_null(); }
    const Json& raw(const std::string& k) const
    {
        if (!params_.contains(k)) throw ConfigError("missing parameter '" + k + "'");
        return params_.at(k);
    }

    int integer(const std::string& k) const { return typed<int>(k, "an integer"); }
    double number(const std::string& k) const
    {
        try {
            return io::extended_real_from_json(raw(k));
        } catch (const io::FormatError&) {
            throw ConfigError("parameter '" + k + "' must be a number");
        }
    }
    std::string text(const std::string& k) const { return typed<std::string>(k, "a string"); }
    bool flag(const std::string& k) const { return typed<bool>(k, "a boolean"); }
    Complex complex(const std::string& k) const
    {
        try {
            return io::complex_from_json(raw(k));
        } catch (const io::FormatError&) {
            throw ConfigError("parameter '" + k + "' must be a number or [re, im]");
        }
    }
    std::vector<int> integers(const std::string& k) const
    {
        const Json& j = raw(k);
        if (j.is_number_integer()) return {j.get<int>()};
        return typed<std::vector<int>>(k, "an integer list");
    }

    void check_below(const std::string& name, double value, double tol)
    {
        checks_.push_back({name, value, tol, value < tol});
    }
    void check_true(const std::string& name, bool ok) { checks_.push_back({name, ok ? 1.0 : 0.0, 1.0, ok, true}); }
    void line(const std::string& s) { lines_.push_back(s); }
    void artifact(const std::string& file, std::string contents) { artifacts_.emplace_back(file, std::move(contents)); }

    Json result = Json::object();
    const std::vector<Check>& checks() const { return checks_; }
    const std::vector<std::string>& lines() const { return lines_; }
    std::vector<std::pair<std::string, std::string>>& artifacts() { return artifacts_; }

private:
    template <typename T>
    T typed(const std::string& k, const char* what) const
    {
        try {
            return raw(k).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("parameter '" + k + "' must be " + what);
        }
    }

    Json params_;
    std::uint64_t seed_;
    std::vector<Check> checks_;
    std::vector<std::string> lines_;
    std::vector<std::pair<std::string, std::string>> artifacts_;
};

namespace detail {

inline std::string upper(std::string s)
{
    for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
}

inline std::string fmt(double x) { return io::real_csv(x); }

inline std::string fmt(Complex z) { return "(" + fmt(z.real()) + ", " + fmt(z.imag()) + ")"; }

inline Json eigenvalue_list(const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline double distance_to(const RVector& spec, double e)
{
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < spec.size(); ++i) d = std::min(d, std::abs(spec[i] - e));
    return d;
}

/// Rapidities from the parameters: an explicit set (`values` or `roots`), or
/// the ground state of (model, L, N) solved on the spot.
inline RapiditySet input_roots(Context& ctx)
{
    if (ctx.has("values") || ctx.has("roots")) {
        try {
            return io::roots_from_json(ctx.params());
        } catch (const io::FormatError& e) {
            throw ConfigError(e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(e.what());
        }
    }
    if (!ctx.has("N")) throw ConfigError("give rapidities (values, or a solve report via --json) or N for the ground state");
    const std::string model = upper(ctx.text("model"));
    const int L = ctx.integer("L"), N = ctx.integer("N");
    SolveReport rep;
    if (model == "XXX")
        rep = solve_logbae(L, N, ground_state_qnums(L, N));
    else if (model == "XXZ")
        rep = solve_logbae_xxz(L, N, ctx.number("gamma"), ground_state_qnums(L, N));
    else
        throw ConfigError("model must be XXX or XXZ");
    if (!rep.converged) throw ConvergenceError("ground-state Bethe equations did not converge");
    return rep.roots;
}

inline double gamma_of(const RapiditySet& r, const Context& ctx)
{
    return r.params.gamma ? *r.params.gamma : ctx.number("gamma");
}

// ---- ed -----------------------------------------------------------------

inline void cmd_ed(Context& ctx)
{
    const int L = ctx.integer("L");
    const std::string model = upper(ctx.text("model"));
    if (model != "XXX" && model != "XXZ") throw ConfigError("model must be XXX or XXZ");
    std::shared_ptr<const SectorBasis> basis = ctx.has("N") ? build_sector_basis(L, ctx.integer("N")) : nullptr;
    OperatorMatrix H;
    if (model == "XXX")
        H = basis ? build_xxx_hamiltonian(L, ctx.number("J"), basis) : build_xxx_hamiltonian(L, ctx.number("J"));
    else
        H = basis ? build_xxz_hamiltonian(L, ctx.number("delta"), basis) : build_xxz_hamiltonian(L, ctx.number("delta"));
    DiagonalizeOptions opt;
    opt.count = ctx.integer("count");
    opt.seed = static_cast<unsigned>(ctx.seed());
    const Spectrum sp = diagonalize(H, opt);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < sp.eigenvalues.size(); ++i) {
        const CVector v = sp.eigenvectors->col(i);
        worst = std::max(worst, (H.apply(v) - sp.eigenvalues[i] * v).norm() / v.norm());
    }
    ctx.check_below("hermiticity_defect", H.hermiticity_defect(), 1e-12);
    ctx.check_below("eigenpair_residual", worst, 1e-10);
    ctx.result = {{"model", model}, {"L", L}, {"N", basis ? Json(ctx.integer("N")) : Json()}, {"dim", H.dim()},
                  {"eigenvalues", eigenvalue_list(sp.eigenvalues)}};
    ctx.artifact("spectrum.csv", io::spectrum_csv(sp.eigenvalues));
    if (ctx.has("matrix_format")) ctx.artifact("matrix.json", io::matrix_json(H, ctx.text("matrix_format")).dump(1) + "\n");
    ctx.line("dimension " + std::to_string(H.dim()) + ", lowest eigenvalue " + fmt(sp.eigenvalues[0]));
}

// ---- bae ----------------------------------------------------------------

inline double exp_residual(const RapiditySet& r, const Context& ctx)
{
    switch (r.model) {
    case Model::XXX: return bae_residual_xxx(r);
    case Model::XXZ: return bae_residual_xxz(r.values, r.L, gamma_of(r, ctx));
    case Model::BOSE: {
        const double ring = ctx.has("ring") ? ctx.number("ring") : r.L;
        return bae_residual_bose(r.values, ring, r.params.c ? *r.params.c : ctx.number("c"));
    }
    default: throw ConfigError("model without a Bethe-equation residual");
    }
}

inline void cmd_bae_solve(Context& ctx)
{
    const std::string model = upper(ctx.text("model"));
    const int L = ctx.integer("L"), N = ctx.integer("N");
    const QuantumNumbers q = ctx.has("qnums") ? QuantumNumbers{L, N, ctx.integers("qnums")} : ground_state_qnums(L, N);
    SolveReport rep;
    Complex E{0.0};
    if (model == "XXX") {
        rep = solve_logbae(L, N, q);
    } else if (model == "XXZ") {
        rep = solve_logbae_xxz(L, N, ctx.number("gamma"), q);
    } else if (model == "BOSE") {
        rep = solve_bose(ctx.has("ring") ? ctx.number("ring") : L, N, ctx.number("c"), q);
    } else {
        throw ConfigError("model must be XXX, XXZ or BOSE");
    }
    ctx.result = io::solve_report_json(rep);
    if (!rep.converged) throw ConvergenceError("Newton iteration did not converge (best residual " + fmt(rep.residual) + ")");
    if (model == "XXX")
        E = energy_xxx(rep.roots, 1.0);
    else if (model == "XXZ")
        E = energy_xxz(rep.roots.values, ctx.number("gamma"));
    else
        E = energy_bose(rep.roots);
    ctx.result["energy"] = io::complex_json(E);
    ctx.check_below("bethe_equation_residual", exp_residual(rep.roots, ctx), 1e-10);
    ctx.line("converged in " + std::to_string(rep.iterations) + " iterations, E = " + fmt(E.real()));
}

inline void cmd_bae_residual(Context& ctx)
{
    const RapiditySet r = input_roots(ctx);
    const double res = exp_residual(r, ctx);
    ctx.result = {{"model", to_string(r.model)}, {"L", r.L}, {"N", r.N()}, {"residual", res}};
    ctx.check_below("bethe_equation_residual", res, ctx.number("tolerance"));
    ctx.line("residual " + fmt(res));
}

inline void cmd_bae_two_magnon(Context& ctx)
{
    const int L = ctx.integer("L");
    const TwoMagnonReport rep = classify_two_magnon(L);
    Json sols = Json::array();
    double worst = 0.0;
    int bound = 0;
    for (const auto& s : rep.solutions) {
        sols.push_back({{"kind", to_string(s.kind)}, {"values", io::complex_list_json(s.roots.values)}, {"residual", s.residual}});
        worst = std::max(worst, s.residual);
        bound += s.kind == PairKind::bound_pair;
    }
    ctx.result = {{"L", L}, {"solutions", sols}, {"real_pairs", rep.solutions.size() - static_cast<std::size_t>(bound)},
                  {"bound_pairs", bound}, {"seeds_tried", rep.seeds_tried}, {"unconverged_seeds", rep.unconverged_seeds}};
    ctx.check_below("max_residual", worst, 1e-10);
    ctx.line(std::to_string(rep.solutions.size() - static_cast<std::size_t>(bound)) + " real pairs, " + std::to_string(bound) +
             " bound pairs");
}

// ---- bethe-vector ---------------------------------------------------------

inline CVector bethe_vector(const RapiditySet& r, const Context& ctx)
{
    if (r.model == Model::XXX) return offshell_vector_normalized(r);
    if (r.model == Model::XXZ) return offshell_vector_xxz(r.values, r.L, I * gamma_of(r, ctx));
    throw ConfigError("Bethe vectors are built for XXX or XXZ rapidities");
}

inline void cmd_vector_build(Context& ctx)
{
    const RapiditySet r = input_roots(ctx);
    const CVector v = bethe_vector(r, ctx);
    SectorBasis basis(r.L, r.N());
    ctx.result = {{"L", r.L}, {"N", r.N()}, {"roots", io::rapidity_json(r)}, {"basis", basis.states()}, {"vector", io::vector_json(v)}};
    ctx.artifact("vector.json", io::vector_json(v).dump() + "\n");
    ctx.line("vector of dimension " + std::to_string(v.size()) + " in the sector basis (L = " + std::to_string(r.L) +
             ", N = " + std::to_string(r.N()) + ")");
}

inline void cmd_vector_verify(Context& ctx)
{
    const RapiditySet r = input_roots(ctx);
    const CVector v = bethe_vector(r, ctx);
    auto basis = build_sector_basis(r.L, r.N());
    OperatorMatrix H;
    Complex E;
    if (r.model == Model::XXX) {
        H = build_xxx_hamiltonian(r.L, 1.0, basis);
        E = energy_xxx(r, 1.0);
    } else {
        const double g = gamma_of(r, ctx);
        H = build_xxz_hamiltonian(r.L, std::cos(g), basis);
        E = energy_xxz(r.values, g);
    }
    if (v.norm() == 0.0) throw ConfigError("the Bethe vector vanishes for these rapidities");
    const double res = eigen_residual(H, v, E);
    ctx.check_below("eigen_residual", res, 1e-8);
    double hw = 0.0;
    // only the isotropic chain has the total-spin symmetry
    if (r.N() >= 1 && r.model == Model::XXX) {
        hw = highest_weight_residual(v, r.L, r.N());
        ctx.check_below("highest_weight_residual", hw, 1e-8);
    }
    Json ed = Json();
    if (H.dim() <= 4096) {
        DiagonalizeOptions opt;
        opt.vectors = false;
        const double d = distance_to(diagonalize(H, opt).eigenvalues, E.real());
        ctx.check_below("energy_in_spectrum", d, 1e-8);
        ed = d;
    }
    ctx.result = {{"model", to_string(r.model)}, {"L", r.L}, {"N", r.N()}, {"energy", io::complex_json(E)},
                  {"eigen_residual", res}, {"highest_weight_residual", r.model == Model::XXX ? Json(hw) : Json()},
                  {"distance_to_spectrum", ed}};
    ctx.line("E = " + fmt(E.real()) + ", eigen residual " + fmt(res));
}

// ---- thermo ---------------------------------------------------------------

inline void cmd_thermo_density(Context& ctx)
{
    const RootDensity rho = solve_root_density(ctx.number("q"), ctx.integer("nodes"));
    const double res = integral_equation_residual(rho);
    ctx.result = io::density_json(rho);
    ctx.result["D"] = density_D(rho);
    ctx.result["integral_equation_residual"] = res;
    ctx.check_below("integral_equation_residual", res, 1e-8);
    if (std::isinf(rho.q)) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < rho.nodes.size(); ++i) worst = std::max(worst, std::abs(rho.values[i] - infinite_density(rho.nodes[i])));
        ctx.result["closed_form_deviation"] = worst;
        ctx.check_below("closed_form_deviation", worst, 1e-7);
    }
    ctx.line("D = " + fmt(density_D(rho)) + " on " + std::to_string(rho.nodes.size()) + " nodes");
}

inline void cmd_thermo_gs_energy(Context& ctx)
{
    const RootDensity rho = solve_root_density(ctx.number("q"), ctx.integer("nodes"));
    const double J = ctx.number("J");
    const double e = gs_energy_density(rho, J);
    ctx.result = {{"q", io::extended_real_json(rho.q)}, {"J", J}, {"e", e}};
    if (std::isinf(rho.q)) {
        ctx.result["reference"] = -J * std::log(2.0);
        ctx.check_below("deviation_from_minus_J_ln2", std::abs(e + J * std::log(2.0)), 1e-8);
    }
    ctx.line("e = " + fmt(e));
}

inline void cmd_thermo_condensation(Context& ctx)
{
    const std::string f = ctx.text("f");
    std::function<double(double)> fn;
    if (f == "energy")
        fn = [](double l) { return -0.5 / (l * l + 0.25); };
    else if (f == "one")
        fn = [](double) { return 1.0; };
    else
        throw ConfigError("f must be energy or one");
    const auto rows = condensation_check(ctx.integers("Ls"), fn, ctx.integer("nodes"));
    Json table = Json::array();
    bool monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.push_back({{"L", rows[i].L}, {"sum", rows[i].sum}, {"integral", rows[i].integral}, {"gap", rows[i].gap}});
        if (i > 0 && std::abs(rows[i].gap) > std::abs(rows[i - 1].gap) + 1e-12) monotone = false;
    }
    ctx.result = {{"f", f}, {"rows", table}};
    ctx.check_true("gap_shrinks_monotonically", monotone);
    ctx.artifact("condensation.csv", io::condensation_csv(rows));
    if (!rows.empty()) ctx.line("largest L gap " + fmt(rows.back().gap));
}

// ---- vertex ---------------------------------------------------------------

inline void cmd_vertex_ybe(Context& ctx)
{
    const int trials = ctx.integer("trials");
    if (trials < 1) throw ConfigError("trials must be positive");
    const double radius = ctx.number("radius");
    const std::uint64_t seed = ctx.seed();
    auto res = parallel_trials<double>(trials, [&](int t) {
        auto rng = trial_rng(seed, t);
        const Complex l = random_complex(rng, radius), m = random_complex(rng, radius), n = random_complex(rng, radius);
        const Complex eta = random_complex(rng, radius);
        return ybe_residual(l, m, n, eta, 1.0);
    });
    const auto worst = std::max_element(res.begin(), res.end());
    ctx.result = {{"trials", trials}, {"residuals", res}, {"max_residual", *worst}, {"worst_trial", worst - res.begin()}};
    ctx.check_below("max_ybe_residual", *worst, ctx.number("tolerance"));
    ctx.line("max residual over " + std::to_string(trials) + " trials: " + fmt(*worst));
}

inline VertexWeights weights_param(const Context& ctx)
{
    try {
        return io::weights_from_json(ctx.raw("weights"));
    } catch (const io::FormatError& e) {
        throw ConfigError(e.what());
    }
}

inline void cmd_vertex_transfer(Context& ctx)
{
    const int L = ctx.integer("L");
    const VertexWeights w = weights_param(ctx);
    const Complex lambda = ctx.complex("lambda"), mu = ctx.complex("mu");
    const TransferMatrix t1 = transfer(lambda, L, w), t2 = transfer(mu, L, w);
    Json sectors = Json::array();
    double comm = 0.0, scale = 0.0;
    for (int N = 0; N <= L; ++N) {
        const CMatrix& a = t1.blocks[static_cast<std::size_t>(N)];
        const CMatrix& b = t2.blocks[static_cast<std::size_t>(N)];
        comm = std::max(comm, max_abs(a * b - b * a));
        scale = std::max(scale, max_abs(a) * max_abs(b) * static_cast<double>(a.rows()));
        Eigen::ComplexEigenSolver<CMatrix> es(a, false);
        std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
        std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) {
            return std::abs(x) != std::abs(y) ? std::abs(x) > std::abs(y) : std::arg(x) < std::arg(y);
        });
        sectors.push_back({{"N", N}, {"dim", a.rows()}, {"eigenvalues", io::complex_list_json(ev)}});
    }
    const double rel = scale > 0.0 ? comm / scale : comm;
    ctx.result = {{"L", L}, {"weights", io::weights_json(w)}, {"lambda", io::complex_json(lambda)}, {"mu", io::complex_json(mu)},
                  {"sectors", sectors}, {"commutator_max_entry", comm}, {"commutator_relative", rel}};
    ctx.check_below("commutator_relative", rel, 1e-12);
    ctx.line("[t(lambda), t(mu)] max entry " + fmt(comm));
}

inline void cmd_vertex_partition(Context& ctx)
{
    const int L = ctx.integer("L"), M = ctx.integer("M");
    const Complex a = ctx.complex("a"), b = ctx.complex("b"), c = ctx.complex("c");
    auto integral = [](Complex z) { return z.imag() == 0.0 && z.real() == std::round(z.real()) && std::abs(z.real()) < 1e6; };
    const bool brute = L * M <= 12;
    if (integral(a) && integral(b) && integral(c)) {
        using I64 = std::int64_t;
        const I64 ia = std::llround(a.real()), ib = std::llround(b.real()), ic = std::llround(c.real());
        const I64 z = partition_function<I64>(L, M, ia, ib, ic);
        ctx.result = {{"L", L}, {"M", M}, {"exact", true}, {"Z", z}};
        if (brute) {
            const I64 zb = partition_function_bruteforce<I64>(L, M, ia, ib, ic);
            ctx.result["bruteforce"] = zb;
            ctx.check_true("equals_enumeration", z == zb);
        }
        ctx.line("Z = " + std::to_string(z));
    } else {
        const Complex z = partition_function<Complex>(L, M, a, b, c);
        ctx.result = {{"L", L}, {"M", M}, {"exact", false}, {"Z", io::complex_json(z)}};
        if (brute) {
            const Complex zb = partition_function_bruteforce<Complex>(L, M, a, b, c);
            ctx.result["bruteforce"] = io::complex_json(zb);
            ctx.check_below("relative_deviation", std::abs(z - zb) / std::max(std::abs(zb), 1e-300), 1e-10);
        }
        ctx.line("Z = " + fmt(z));
    }
}

inline void cmd_vertex_ice_entropy(Context& ctx)
{
    const IceEntropy e = ice_entropy(ctx.integer("lmax"), ctx.integer("lmin"));
    Json rows = Json::array();
    for (const auto& r : e.rows) rows.push_back({{"L", r.L}, {"logLambda_over_L", r.log_lambda_over_L}, {"iterations", r.iterations}});
    ctx.result = {{"rows", rows}, {"extrapolated", e.extrapolated}, {"alpha", e.alpha}, {"beta", e.beta}, {"reference", lieb_ice_entropy()}};
    ctx.check_below("deviation_from_reference", std::abs(e.extrapolated - lieb_ice_entropy()), 1e-2);
    ctx.artifact("entropy.csv", io::entropy_csv(e));
    ctx.line("extrapolated entropy " + fmt(e.extrapolated) + " (reference " + fmt(lieb_ice_entropy()) + ")");
}

inline void cmd_vertex_hamiltonian_link(Context& ctx)
{
    const int L = ctx.integer("L");
    const Complex eta = ctx.complex("eta"), rho = ctx.complex("rho");
    const double J = ctx.number("J"), step = ctx.number("step"), order_step = ctx.number("order_step");
    const double dev = hamiltonian_from_transfer(L, eta, rho, J, step).deviation;
    const double d1 = hamiltonian_from_transfer(L, eta, rho, J, order_step).deviation;
    const double d2 = hamiltonian_from_transfer(L, eta, rho, J, order_step / 2).deviation;
    const double ratio = d1 / d2;
    ctx.result = {{"L", L}, {"eta", io::complex_json(eta)}, {"step", step}, {"deviation", dev},
                  {"order_step", order_step}, {"halving_ratio", ratio}};
    ctx.check_below("deviation", dev, 1e-6);
    ctx.check_below("halving_ratio_minus_4", std::abs(ratio - 4.0), 0.2);
    ctx.line("max entry deviation " + fmt(dev) + ", step-halving ratio " + fmt(ratio));
}

// ---- aba ------------------------------------------------------------------

inline void cmd_aba_slavnov(Context& ctx)
{
    const int L = ctx.integer("L");
    const double gamma = ctx.number("gamma");
    const auto vac = VacuumFunctions::homogeneous(L, I * gamma);
    const std::string numerator = ctx.text("numerator");
    if (numerator != "exchanged" && numerator != "as-printed") throw ConfigError("numerator must be exchanged or as-printed");
    const SlavnovNumerator variant = numerator == "exchanged" ? SlavnovNumerator::exchanged : SlavnovNumerator::as_printed;
    const double tol = ctx.number("tolerance");
    Json reports = Json::array();
    double worst = 0.0;
    auto record = [&](const SlavnovReport& r) {
        reports.push_back(io::slavnov_json(r));
        worst = std::max(worst, r.rel_err);
    };
    if (ctx.has("mu") && ctx.has("lambda")) {
        record(slavnov_report(io::complex_list_from_json(ctx.raw("mu")), io::complex_list_from_json(ctx.raw("lambda")), vac, true, variant));
    } else {
        const int trials = ctx.integer("trials");
        const double radius = ctx.number("radius");
        for (int N : ctx.integers("N")) {
            const QuantumNumbers q = ctx.has("qnums") ? QuantumNumbers{L, N, ctx.integers("qnums")} : ground_state_qnums(L, N);
            const SolveReport on = solve_logbae_xxz(L, N, gamma, q);
            if (!on.converged) throw ConvergenceError("on-shell roots did not converge for N = " + std::to_string(N));
            const std::uint64_t seed = ctx.seed() + static_cast<std::uint64_t>(N) * 1000003ULL;
            auto rs = parallel_trials<SlavnovReport>(trials, [&](int t) {
                auto rng = trial_rng(seed, t);
                for (;;) {
                    std::vector<Complex> l;
                    for (int j = 0; j < N; ++j) l.push_back(random_complex(rng, radius));
                    try {
                        return slavnov_report(on.roots.values, l, vac, true, variant);
                    } catch (const DomainError&) {
                        // redraw near-singular configurations
                    }
                }
            });
            for (const auto& r : rs) record(r);
        }
    }
    ctx.result = {{"L", L}, {"gamma", gamma}, {"numerator", numerator}, {"reports", reports}, {"max_rel_err", worst}};
    ctx.check_below("max_rel_err", worst, tol);
    ctx.line(std::to_string(reports.size()) + " pairings, max relative error " + fmt(worst));
}

inline void cmd_aba_verify_action(Context& ctx)
{
    const int L = ctx.integer("L"), N = ctx.integer("N"), trials = ctx.integer("trials");
    const Complex eta = ctx.complex("eta");
    const double radius = ctx.number("radius");
    const VacuumFunctions vac = ctx.has("xi") ? VacuumFunctions::inhomogeneous(eta, io::complex_list_from_json(ctx.raw("xi")))
                                              : VacuumFunctions::homogeneous(L, eta);
    if (vac.L != L) throw ConfigError("xi must have L entries");
    const std::uint64_t seed = ctx.seed();
    auto res = parallel_trials<std::pair<double, double>>(trials, [&](int t) {
        auto rng = trial_rng(seed, t);
        for (;;) {
            std::vector<Complex> l;
            for (int j = 0; j < N; ++j) l.push_back(random_complex(rng, radius));
            try {
                double direct = 0.0, dual = 0.0;
                for (std::size_t ell = 0; ell < static_cast<std::size_t>(N); ++ell) {
                    direct = std::max(direct, offshell_action_residual(l, ell, vac));
                    dual = std::max(dual, dual_action_residual(l, ell, vac));
                }
                return std::pair{direct, dual};
            } catch (const DomainError&) {
            }
        }
    });
    double direct = 0.0, dual = 0.0;
    for (auto [a, b] : res) {
        direct = std::max(direct, a);
        dual = std::max(dual, b);
    }
    ctx.result = {{"L", L}, {"N", N}, {"eta", io::complex_json(eta)}, {"trials", trials}, {"max_action_residual", direct},
                  {"max_dual_action_residual", dual}};
    ctx.check_below("max_action_residual", direct, 1e-10);
    ctx.check_below("max_dual_action_residual", dual, 1e-10);
    ctx.line("action residual " + fmt(direct) + ", dual " + fmt(dual));
}

// ---- hubbard --------------------------------------------------------------

inline void cmd_hubbard_ed(Context& ctx)
{
    const int L = ctx.integer("L"), N = ctx.integer("N"), M = ctx.integer("M");
    const auto h = build_hubbard_hamiltonian(L, ctx.number("u"), N, M);
    DiagonalizeOptions opt;
    opt.count = ctx.integer("count");
    opt.vectors = false;
    opt.seed = static_cast<unsigned>(ctx.seed());
    const Spectrum sp = diagonalize(h.matrix, opt);
    ctx.check_below("hermiticity_defect", h.matrix.hermiticity_defect(), 1e-12);
    ctx.result = {{"L", L}, {"N", N}, {"M", M}, {"u", ctx.number("u")}, {"dim", h.matrix.dim()}, {"eigenvalues", eigenvalue_list(sp.eigenvalues)}};
    ctx.artifact("spectrum.csv", io::spectrum_csv(sp.eigenvalues));
    ctx.line("dimension " + std::to_string(h.matrix.dim()) + ", lowest eigenvalue " + fmt(sp.eigenvalues[0]));
}

inline LiebWuReport liebwu_from_params(Context& ctx)
{
    const int L = ctx.integer("L"), N = ctx.integer("N"), M = ctx.integer("M");
    LiebWuQuantumNumbers q = liebwu_ground_state_qnums(L, N, M);
    if (ctx.has("n")) q.n = ctx.integers("n");
    if (ctx.has("m")) q.m = ctx.integers("m");
    return solve_liebwu(L, N, M, ctx.number("u"), q);
}

inline void cmd_hubbard_liebwu(Context& ctx)
{
    const LiebWuReport rep = liebwu_from_params(ctx);
    ctx.result = io::nested_roots_json(rep.roots);
    ctx.result["qnums"] = {{"n", rep.qnums.n}, {"m", rep.qnums.m}};
    ctx.result["residual"] = io::extended_real_json(rep.residual);
    ctx.result["iterations"] = rep.iterations;
    ctx.result["converged"] = rep.converged;
    ctx.result["admissible"] = rep.admissible;
    if (!rep.converged) throw ConvergenceError("Lieb-Wu equations did not converge");
    const auto [E, P] = energy_momentum(rep.roots);
    ctx.result["E"] = E.real();
    ctx.result["P"] = P;
    ctx.check_below("liebwu_residual", rep.residual, 1e-10);
    ctx.check_true("admissible", rep.admissible);
    ctx.line("E = " + fmt(E.real()) + ", P = " + fmt(P));
}

inline void cmd_hubbard_verify(Context& ctx)
{
    NestedRoots r;
    if (ctx.params().contains("k")) {
        try {
            r = io::nested_roots_from_json(ctx.params());
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else {
        const LiebWuReport rep = liebwu_from_params(ctx);
        if (!rep.converged) throw ConvergenceError("Lieb-Wu equations did not converge");
        r = rep.roots;
    }
    const double lw = liebwu_residual(r);
    ctx.check_below("liebwu_residual", lw, 1e-10);
    const auto h = build_hubbard_hamiltonian(r.L, r.u, r.N(), r.M());
    const CVector psi = nested_state(r, *h.basis);
    const double nrm = psi.norm();
    ctx.check_true("nonzero_state", nrm > 1e-8);
    if (nrm <= 1e-8) {
        ctx.result = {{"roots", io::nested_roots_json(r)}, {"liebwu_residual", lw}, {"state_norm", nrm}};
        return;
    }
    const auto [E, P] = energy_momentum(r);
    const double res = (h.matrix.apply(psi) - E.real() * psi).norm() / nrm;
    const auto T = build_hubbard_translation(r.L, r.N(), r.M());
    const double tres = (T.matrix.apply(psi) - std::exp(-I * P) * psi).norm() / nrm;
    const double sres = r.M() >= 1 ? apply_spin_raise(*h.basis, psi).norm() / nrm : 0.0;
    DiagonalizeOptions opt;
    opt.vectors = false;
    const double d = h.matrix.dim() <= 4096 ? distance_to(diagonalize(h.matrix, opt).eigenvalues, E.real()) : 0.0;
    ctx.check_below("eigen_residual", res, 1e-8);
    ctx.check_below("spin_raise_residual", sres, 1e-8);
    ctx.check_below("translation_residual", tres, 1e-8);
    ctx.check_below("energy_in_spectrum", d, 1e-8);
    ctx.result = {{"roots", io::nested_roots_json(r)}, {"E", E.real()}, {"P", P}, {"liebwu_residual", lw}, {"eigen_residual", res},
                  {"spin_raise_residual", sres}, {"translation_residual", tres}, {"distance_to_spectrum", d}};
    ctx.line("E = " + fmt(E.real()) + ", P = " + fmt(P) + ", eigen residual " + fmt(res));
}

struct CommandEntry {
    CommandSpec spec;
    std::function<void(Context&)> run;
};

inline const std::vector<CommandEntry>& command_table()
{
    static const std::vector<CommandEntry> table = [] {
        const Json null;
        const ParamSpec model_xxx{"model", "XXX", "XXX or XXZ"};
        const ParamSpec gamma{"gamma", 0.9, "XXZ anisotropy angle, Delta = cos(gamma)"};
        const ParamSpec values{"values", null, "rapidities [[re, im], ...] (default: the ground state of L, N)"};
        const Json default_weights = {{"rho", 1.0}, {"eta", Json::array({0.0, 0.7})}};
        std::vector<CommandEntry> t{
            {{"ed", "spectrum of an XXX/XXZ chain by exact diagonalization",
              {{"L", 8, "chain length"}, model_xxx, {"N", null, "down-spin sector (omit for the full space)"}, {"J", 1.0, "XXX coupling"},
               {"delta", 1.0, "XXZ anisotropy"}, {"count", -1, "number of lowest levels (-1 for all)"},
               {"matrix_format", null, "also export the matrix: dense or coo"}}},
             cmd_ed},
            {{"bae solve", "solve the logarithmic Bethe equations",
              {{"model", "XXX", "XXX, XXZ or BOSE"}, {"L", 8, "chain length"}, {"N", 4, "number of roots"},
               {"qnums", null, "quantum numbers (default: ground state)"}, gamma, {"c", 1.0, "Bose-gas coupling"},
               {"ring", null, "Bose-gas ring length (default L)"}}},
             cmd_bae_solve},
            {{"bae residual", "Bethe-equation residual of given rapidities (RapiditySet or SolveReport JSON)",
              {model_xxx, {"L", 8, "chain length"}, {"N", null, "number of roots when solving the ground state"}, gamma, values, {"c", 1.0, "Bose-gas coupling"},
               {"ring", null, "Bose-gas ring length (default L)"}, {"tolerance", 1e-10, "pass threshold"}}},
             cmd_bae_residual},
            {{"bae two-magnon", "all N = 2 solutions of the XXX chain, real and bound pairs", {{"L", 8, "even chain length"}}},
             cmd_bae_two_magnon},
            {{"bethe-vector build", "coordinate Bethe vector of given (or ground-state) rapidities",
              {model_xxx, {"L", 8, "chain length"}, {"N", null, "number of roots when solving the ground state"}, gamma, values}},
             cmd_vector_build},
            {{"bethe-vector verify", "eigenvector, highest-weight and spectrum checks of a Bethe vector",
              {model_xxx, {"L", 8, "chain length"}, {"N", null, "number of roots when solving the ground state"}, gamma, values}},
             cmd_vector_verify},
            {{"thermo density", "ground-state root density on (-q, q)",
              {{"q", "inf", "support half-width or inf"}, {"nodes", 128, "quadrature nodes"}}},
             cmd_thermo_density},
            {{"thermo gs-energy", "ground-state energy per site from the root density",
              {{"q", "inf", "support half-width or inf"}, {"J", 1.0, "coupling"}, {"nodes", 128, "quadrature nodes"}}},
             cmd_thermo_gs_energy},
            {{"thermo condensation", "finite-L root sums against the density integral",
              {{"Ls", Json::array({8, 10, 12, 14, 16}), "even chain lengths"}, {"f", "energy", "summand: energy or one"},
               {"nodes", 256, "quadrature nodes"}}},
             cmd_thermo_condensation},
            {{"vertex ybe", "Yang-Baxter residual over random spectral parameters",
              {{"trials", 100, "number of draws"}, {"radius", 1.0, "draw box half-width"}, {"tolerance", 1e-12, "pass threshold"}}},
             cmd_vertex_ybe},
            {{"vertex transfer", "transfer-matrix spectra per S^z sector and commutation check",
              {{"L", 6, "chain length (<= 12)"}, {"weights", default_weights, "{a, b, c} or {rho, lambda, eta, xi}"},
               {"lambda", Json::array({0.3, 0.1}), "spectral parameter"}, {"mu", Json::array({-0.2, 0.4}), "second spectral parameter"}}},
             cmd_vertex_transfer},
            {{"vertex partition", "periodic L x M partition function",
              {{"L", 3, "columns"}, {"M", 3, "rows"}, {"a", 1, "weight a"}, {"b", 1, "weight b"}, {"c", 1, "weight c"}}},
             cmd_vertex_partition},
            {{"vertex ice-entropy", "square-ice entropy from the leading transfer eigenvalue",
              {{"lmax", 12, "largest even L"}, {"lmin", 2, "smallest L"}}},
             cmd_vertex_ice_entropy},
            {{"vertex hamiltonian-link", "XXZ Hamiltonian from the logarithmic derivative of the transfer matrix",
              {{"L", 4, "chain length"}, {"eta", 0.3, "crossing parameter"}, {"rho", 1.0, "weight normalization"}, {"J", 1.0, "coupling"},
               {"step", 1e-5, "finite-difference step"}, {"order_step", 2e-3, "step for the halving test"}}},
             cmd_vertex_hamiltonian_link},
            {{"aba slavnov", "determinant scalar products against explicit pairings",
              {{"L", 8, "chain length"}, {"N", Json::array({1, 2, 3}), "magnon numbers"}, gamma, {"trials", 20, "off-shell draws per N"},
               {"radius", 0.8, "draw box half-width"}, {"qnums", null, "on-shell quantum numbers (default ground state)"},
               {"numerator", "exchanged", "exchanged or as-printed"}, {"mu", null, "explicit on-shell set"},
               {"lambda", null, "explicit off-shell set"}, {"tolerance", 1e-9, "pass threshold"}}},
             cmd_aba_slavnov},
            {{"aba verify-action", "off-shell action of A + D and C on B-product states",
              {{"L", 6, "chain length"}, {"N", 3, "number of B operators"}, {"eta", Json::array({0.2, 0.7}), "crossing parameter"},
               {"trials", 10, "draws"}, {"radius", 0.8, "draw box half-width"}, {"xi", null, "inhomogeneities"}}},
             cmd_aba_verify_action},
            {{"hubbard ed", "Hubbard spectrum on an (N, M) block",
              {{"L", 4, "sites (<= 8)"}, {"u", 1.0, "coupling"}, {"N", 4, "electrons"}, {"M", 2, "down spins"},
               {"count", -1, "number of lowest levels (-1 for all)"}}},
             cmd_hubbard_ed},
            {{"hubbard liebwu", "solve the Lieb-Wu equations",
              {{"L", 6, "sites"}, {"u", 1.0, "coupling"}, {"N", 2, "electrons"}, {"M", 1, "down spins"},
               {"n", null, "charge quantum numbers"}, {"m", null, "spin quantum numbers"}}},
             cmd_hubbard_liebwu},
            {{"hubbard verify", "check a nested Bethe state against exact diagonalization",
              {{"L", 6, "sites"}, {"u", 1.0, "coupling"}, {"N", 2, "electrons"}, {"M", 1, "down spins"},
               {"n", null, "charge quantum numbers"}, {"m", null, "spin quantum numbers"}}},
             cmd_hubbard_verify},
        };
        // `verify ybe` is an alias of `vertex ybe`
        for (const auto& e : t)
            if (e.spec.name == "vertex ybe") {
                CommandEntry alias = e;
                alias.spec.name = "verify ybe";
                alias.spec.help += " (alias of vertex ybe)";
                t.push_back(alias);
                break;
            }
        return t;
    }();
    return table;
}

} // namespace detail

inline std::vector<CommandSpec> commands()
{
    std::vector<CommandSpec> out;
    for (const auto& e : detail::command_table()) out.push_back(e.spec);
    return out;
}

inline const CommandSpec* find_command(const std::string& name)
{
    for (const auto& e : detail::command_table())
        if (e.spec.name == name) return &e.spec;
    return nullptr;
}

/// Execute one configuration. Never throws for configuration, convergence or
/// check failures; those are reported through the exit code.
inline RunResult run(const ExperimentConfig& cfg)
{
    RunResult rr;
    const detail::CommandEntry* entry = nullptr;
    for (const auto& e : detail::command_table())
        if (e.spec.name == cfg.command) entry = &e;
    rr.report = {{"command", cfg.command}, {"config", config_json(cfg)}};
    auto fail = [&](int code, const std::string& status, const std::string& msg) {
        rr.exit_code = code;
        rr.report["status"] = status;
        rr.report["error"] = msg;
        rr.summary = cfg.command + ": " + status + ": " + msg + "\n";
    };
    if (!entry) {
        fail(exit_config, "config-error", "unknown command '" + cfg.command + "'");
        rr.report["exit_code"] = rr.exit_code;
        return rr;
    }
    if (!cfg.params.is_object()) {
        fail(exit_config, "config-error", "params must be an object");
        rr.report["exit_code"] = rr.exit_code;
        return rr;
    }
    Json merged = Json::object();
    for (const auto& p : entry->spec.params) merged[p.name] = p.fallback;
    for (const auto& [k, v] : cfg.params.items()) merged[k] = v;
    Context ctx(merged, cfg.seed);
    try {
        entry->run(ctx);
    } catch (const ConfigError& e) {
        fail(exit_config, "config-error", e.what());
    } catch (const io::FormatError& e) {
        fail(exit_config, "config-error", e.what());
    } catch (const nlohmann::json::exception& e) {
        fail(exit_config, "config-error", e.what());
    } catch (const DomainError& e) {
        fail(exit_config, "config-error", e.what());
    } catch (const ConvergenceError& e) {
        fail(exit_no_convergence, "no-convergence", e.what());
    }
    Json checks = Json::array();
    bool all = true;
    std::string lines;
    for (const auto& c : ctx.checks()) {
        all = all && c.pass;
        if (c.boolean) {
            checks.push_back({{"name", c.name}, {"pass", c.pass}});
            lines += "  " + std::string(c.pass ? "PASS " : "FAIL ") + c.name + "\n";
            continue;
        }
        checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        std::ostringstream tol;
        tol << c.tolerance;
        lines += "  " + std::string(c.pass ? "PASS " : "FAIL ") + c.name + " = " + detail::fmt(c.value) + " (< " + tol.str() + ")\n";
    }
    rr.report["checks"] = checks;
    rr.report["result"] = ctx.result;
    if (rr.exit_code == exit_ok) {
        rr.exit_code = all ? exit_ok : exit_invariant;
        rr.report["status"] = all ? "pass" : "invariant-violation";
        rr.summary = cfg.command + ": " + (all ? "pass" : "invariant violation") + "\n";
    }
    for (const auto& l : ctx.lines()) rr.summary += "  " + l + "\n";
    rr.summary += lines;
    rr.report["exit_code"] = rr.exit_code;
    rr.artifacts = std::move(ctx.artifacts());
    return rr;
}

} // namespace bethe::cli
