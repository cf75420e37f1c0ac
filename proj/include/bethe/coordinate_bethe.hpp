#pragma once

// Coordinate Bethe Ansatz for the XXX chain (and its XXZ analog): the
// Vandermonde-regularized wave function, off-shell vectors and the
// observables attached to a set of rapidities.

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "permutations.hpp"
#include "spinchain_ed.hpp"

namespace bethe {

enum class Model { XXX, XXZ, BOSE, HUBBARD_CHARGE_SPIN };

inline std::string to_string(Model m)
{
    switch (m) {
    case Model::XXX: return "XXX";
    case Model::XXZ: return "XXZ";
    case Model::BOSE: return "BOSE";
    case Model::HUBBARD_CHARGE_SPIN: return "HUBBARD_CHARGE_SPIN";
    }
    return "?";
}

inline Model parse_model(const std::string& s)
{
    if (s == "XXX") return Model::XXX;
    if (s == "XXZ") return Model::XXZ;
    if (s == "BOSE") return Model::BOSE;
    if (s == "HUBBARD_CHARGE_SPIN") return Model::HUBBARD_CHARGE_SPIN;
    throw DomainError("unknown model '" + s + "'");
}

struct ModelParams {
    std::optional<double> gamma; // XXZ: Delta = cos(gamma)
    std::optional<double> c;     // Bose gas coupling
    std::optional<double> u;     // Hubbard coupling
    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Rapidities {lambda_j} (or quasi-momenta {k_j}) of one Bethe state.
struct RapiditySet {
    Model model = Model::XXX;
    int L = 0;
    std::vector<Complex> values;
    ModelParams params;

    int N() const { return static_cast<int>(values.size()); }
    friend bool operator==(const RapiditySet&, const RapiditySet&) = default;
};

inline RapiditySet xxx_roots(int L, std::vector<Complex> values)
{
    return RapiditySet{Model::XXX, L, std::move(values), {}};
}

inline constexpr double root_equality_tolerance = 1e-8;
inline constexpr int max_permutation_rank = 10;

/// Quasi-momentum k of a rapidity: e^{ik} = (lambda + i/2) / (lambda - i/2),
/// principal branch, Re k in (-pi, pi].
inline Complex rapidity_to_momentum(Complex lambda)
{
    require(std::abs(lambda - 0.5 * I) > 0.0 && std::abs(lambda + 0.5 * I) > 0.0,
            "rapidity_to_momentum: pole at lambda = +-i/2");
    Complex k = -I * std::log((lambda + 0.5 * I) / (lambda - 0.5 * I));
    if (k.real() <= -pi) k += 2.0 * pi;
    return k;
}

inline Complex momentum_to_rapidity(Complex k)
{
    return 0.5 * std::cos(0.5 * k) / std::sin(0.5 * k);
}

/// Value of a wave-function amplitude plus the magnitude of its largest
/// permutation term, against which cancellations are judged.
struct Amplitude {
    Complex value;
    double scale = 0.0;
};

namespace detail {

/// Shared evaluator of the regularized wave function
///   sum_Q sign(Q) prod_{k<l} pair(lambda_Qk - lambda_Ql) prod_k left(lambda_Qk)^{x_k} right(lambda_Qk)^{L - x_k + 1}
/// with all logs precomputed. `x` may be any integer vector (used for the
/// wave-equation checks outside the simplex).
inline LogSum regularized_sum(const std::vector<int>& x, int L, const std::vector<Complex>& log_left,
                              const std::vector<Complex>& log_right, const std::vector<std::vector<Complex>>& log_pair)
{
    const int n = static_cast<int>(x.size());
    LogSum sum;
    for_each_permutation(n, [&](const std::vector<int>& q, int sign) {
        Complex t = sign < 0 ? Complex{0.0, pi} : Complex{0.0, 0.0};
        for (int k = 0; k < n; ++k) {
            for (int l = k + 1; l < n; ++l) t += log_pair[q[k]][q[l]];
            t += static_cast<double>(x[k]) * log_left[q[k]] + static_cast<double>(L - x[k] + 1) * log_right[q[k]];
        }
        sum.add(t);
    });
    return sum;
}

struct XXXTables {
    std::vector<Complex> left, right;
    std::vector<std::vector<Complex>> pair;
};

inline XXXTables xxx_tables(const std::vector<Complex>& roots)
{
    const std::size_t n = roots.size();
    XXXTables t;
    t.left.resize(n);
    t.right.resize(n);
    t.pair.assign(n, std::vector<Complex>(n));
    for (std::size_t j = 0; j < n; ++j) {
        t.left[j] = safe_log(roots[j] + 0.5 * I);
        t.right[j] = safe_log(roots[j] - 0.5 * I);
        for (std::size_t k = 0; k < n; ++k) t.pair[j][k] = safe_log(roots[j] - roots[k] + I);
    }
    return t;
}

inline XXXTables xxz_tables(const std::vector<Complex>& roots, Complex eta)
{
    const std::size_t n = roots.size();
    XXXTables t;
    t.left.resize(n);
    t.right.resize(n);
    t.pair.assign(n, std::vector<Complex>(n));
    for (std::size_t j = 0; j < n; ++j) {
        t.left[j] = safe_log(std::sinh(roots[j] - 0.5 * eta));
        t.right[j] = safe_log(std::sinh(roots[j] + 0.5 * eta));
        for (std::size_t k = 0; k < n; ++k) t.pair[j][k] = safe_log(std::sinh(roots[j] - roots[k] - eta));
    }
    return t;
}

inline Amplitude to_amplitude(const LogSum& s)
{
    return {s.value(), std::isfinite(s.log_scale()) ? std::exp(s.log_scale()) : 0.0};
}

/// Eq. (regularized wave function) at an arbitrary integer coordinate vector.
inline Amplitude xxx_amplitude_any(const std::vector<int>& x, const std::vector<Complex>& roots, int L)
{
    auto t = xxx_tables(roots);
    return to_amplitude(regularized_sum(x, L, t.left, t.right, t.pair));
}

inline void check_configuration(const std::vector<int>& x, int L, std::size_t n)
{
    require(x.size() == n, "wavefunction: configuration length differs from root count");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] >= 1 && x[i] <= L, "wavefunction: coordinate outside 1..L");
        if (i > 0) require(x[i - 1] < x[i], "wavefunction: coordinates must be strictly increasing");
    }
}

} // namespace detail

/// Regularized XXX wave function
///   Psi(x|{lambda}) = sum_Q sign(Q) prod_{k<l} (lambda_Qk - lambda_Ql + i)
///                     prod_k (lambda_Qk + i/2)^{x_k} (lambda_Qk - i/2)^{L - x_k + 1}.
inline Amplitude offshell_amplitude(const std::vector<int>& x, const RapiditySet& roots)
{
    require(roots.model == Model::XXX, "offshell_wavefunction: XXX rapidities required");
    require(roots.N() <= max_permutation_rank, "offshell_wavefunction: N > 10 rejected (factorial cost)");
    detail::check_configuration(x, roots.L, roots.values.size());
    return detail::xxx_amplitude_any(x, roots.values, roots.L);
}

inline Complex offshell_wavefunction(const std::vector<int>& x, const RapiditySet& roots)
{
    return offshell_amplitude(x, roots).value;
}

namespace detail {

inline CVector regularized_vector(const SectorBasis& basis, int L, const XXXTables& t, bool normalize)
{
    std::vector<LogSum> sums;
    sums.reserve(basis.size());
    double global = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        sums.push_back(regularized_sum(basis.positions(i), L, t.left, t.right, t.pair));
        global = std::max(global, sums.back().log_scale());
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(basis.size()));
    if (!std::isfinite(global)) return v;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double s = sums[i].log_scale();
        if (!std::isfinite(s)) continue;
        v[static_cast<Eigen::Index>(i)] = sums[i].mantissa() * std::exp(s - global);
    }
    if (normalize) {
        const double nrm = v.norm();
        if (nrm > 0) v /= nrm;
    } else {
        v *= std::exp(global);
    }
    return v;
}

} // namespace detail

/// Off-shell Bethe vector sum_x Psi(x|{lambda}) |x> over SectorBasis(L, N).
inline CVector offshell_vector(const RapiditySet& roots)
{
    require(roots.model == Model::XXX, "offshell_vector: XXX rapidities required");
    require(roots.N() <= max_permutation_rank, "offshell_vector: N > 10 rejected (factorial cost)");
    require(roots.N() <= roots.L, "offshell_vector: more roots than sites");
    SectorBasis basis(roots.L, roots.N());
    return detail::regularized_vector(basis, roots.L, detail::xxx_tables(roots.values), false);
}

/// Same direction as offshell_vector, scaled to unit norm without forming the
/// (possibly huge) raw amplitudes.
inline CVector offshell_vector_normalized(const RapiditySet& roots)
{
    require(roots.model == Model::XXX, "offshell_vector: XXX rapidities required");
    require(roots.N() <= max_permutation_rank, "offshell_vector: N > 10 rejected (factorial cost)");
    SectorBasis basis(roots.L, roots.N());
    return detail::regularized_vector(basis, roots.L, detail::xxx_tables(roots.values), true);
}

/// XXZ analog of the regularized vector:
///   sum_Q sign(Q) prod_{k<l} sh(lambda_Qk - lambda_Ql - eta)
///   prod_k sh(lambda_Qk - eta/2)^{x_k} sh(lambda_Qk + eta/2)^{L - x_k + 1},
/// the form generated (up to normalization) by products of B operators.
inline CVector offshell_vector_xxz(const std::vector<Complex>& roots, int L, Complex eta, bool normalize = true)
{
    require(static_cast<int>(roots.size()) <= max_permutation_rank, "offshell_vector_xxz: N > 10 rejected");
    SectorBasis basis(L, static_cast<int>(roots.size()));
    return detail::regularized_vector(basis, L, detail::xxz_tables(roots, eta), normalize);
}

/// E = -(J/2) sum_j 1 / (lambda_j^2 + 1/4).
inline Complex energy_xxx(const RapiditySet& roots, double J)
{
    Complex e{0.0, 0.0};
    for (Complex l : roots.values) {
        require(std::abs(l - 0.5 * I) > 0.0 && std::abs(l + 0.5 * I) > 0.0, "energy_xxx: pole at lambda = +-i/2");
        e += 1.0 / (l * l + 0.25);
    }
    return -0.5 * J * e;
}

/// P = [-i sum_j ln((lambda_j + i/2)/(lambda_j - i/2))] mod 2 pi, principal branch per root.
inline double momentum_xxx(const RapiditySet& roots)
{
    Complex p{0.0, 0.0};
    for (Complex l : roots.values) {
        require(std::abs(l - 0.5 * I) > 0.0 && std::abs(l + 0.5 * I) > 0.0, "momentum_xxx: pole at lambda = +-i/2");
        p += -I * std::log((l + 0.5 * I) / (l - 0.5 * I));
    }
    return mod_two_pi(p.real());
}

/// Energy of H_XXZ (Delta = cos gamma) for roots of the gapless Bethe equations:
/// E = -sum_j sin^2(gamma) / (ch(2 lambda_j) - cos(gamma)).
inline Complex energy_xxz(const std::vector<Complex>& roots, double gamma)
{
    Complex e{0.0, 0.0};
    const double s2 = std::sin(gamma) * std::sin(gamma);
    for (Complex l : roots) e -= s2 / (std::cosh(2.0 * l) - std::cos(gamma));
    return e;
}

/// ||S^+ v|| / ||v|| for v over SectorBasis(L, N).
inline double highest_weight_residual(const CVector& v, int L, int N)
{
    require(N >= 1, "highest_weight_residual: N >= 1 required");
    const double nrm = v.norm();
    require(nrm > 0.0, "highest_weight_residual: zero vector");
    SectorBasis from(L, N), to(L, N - 1);
    return raise_in_sector(v, from, to).norm() / nrm;
}

/// ||H v - E v|| / ||v||.
inline double eigen_residual(const OperatorMatrix& H, const CVector& v, Complex E)
{
    return (H.apply(v) - E * v).norm() / v.norm();
}

} // namespace bethe
