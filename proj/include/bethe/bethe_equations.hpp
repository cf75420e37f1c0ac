#pragma once

// Bethe equations for the XXX and XXZ chains and the Bose gas: residuals in
// exponential and logarithmic form, Newton solvers parameterized by quantum
// numbers, admissibility and the two-magnon (N = 2) classification.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "coordinate_bethe.hpp"
#include "core.hpp"
#include "newton.hpp"

namespace bethe {

struct QuantumNumbers {
    int L = 0;
    int N = 0;
    std::vector<int> n;
    friend bool operator==(const QuantumNumbers&, const QuantumNumbers&) = default;
};

/// n_j = j, j = 1..N: the antiferromagnetic ground state for N = L/2.
inline QuantumNumbers ground_state_qnums(int L, int N)
{
    QuantumNumbers q{L, N, {}};
    for (int j = 1; j <= N; ++j) q.n.push_back(j);
    return q;
}

struct SolveReport {
    RapiditySet roots;
    QuantumNumbers qnums;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline constexpr double root_divergence_cap = 1e4;

namespace detail {

inline void check_qnums(const QuantumNumbers& q, int L, int N)
{
    require(static_cast<int>(q.n.size()) == N, "quantum numbers: expected N entries");
    require(q.L == L && q.N == N, "quantum numbers: L, N mismatch");
    for (std::size_t i = 1; i < q.n.size(); ++i)
        require(q.n[i - 1] < q.n[i], "quantum numbers must be strictly increasing");
}

inline std::vector<Complex> to_complex(const RVector& x)
{
    std::vector<Complex> v(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i)] = x[i];
    return v;
}

inline RVector real_parts(const RapiditySet& roots)
{
    RVector x(roots.N());
    for (int i = 0; i < roots.N(); ++i) {
        require(std::abs(roots.values[static_cast<std::size_t>(i)].imag()) < 1e-12,
                "logarithmic Bethe equations need real roots");
        x[i] = roots.values[static_cast<std::size_t>(i)].real();
    }
    return x;
}

/// |e^A + e^B| / max(1, |e^A|): the exponential-form residual, relative to the
/// left-hand side when that side is large (complex roots).
inline double exp_form_residual(Complex A, Complex B)
{
    const double m = std::max(A.real(), 0.0);
    return std::abs(std::exp(A - m) + std::exp(B - m));
}

/// Constant offset of the logarithmic equations: (N+1)/(2L) for even L. For odd
/// L the branch of (-1)^L shifts the right-hand side by a further 1/(2L) so that
/// integer quantum numbers still parameterize solutions of the product form.
inline double log_offset(int L, int N) { return (N + 1 - (L % 2)) / (2.0 * L); }

inline bool finite_roots(const RVector& x)
{
    return x.allFinite() && (x.size() == 0 || x.cwiseAbs().maxCoeff() < root_divergence_cap);
}

} // namespace detail

/// max_j |((l_j - i/2)/(l_j + i/2))^L + prod_{k=1}^N (l_j - l_k - i)/(l_j - l_k + i)|,
/// divided by the modulus of the first term when that exceeds 1.
inline double bae_residual_xxx(const RapiditySet& roots)
{
    const auto& l = roots.values;
    double r = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
        require(std::abs(l[j] - 0.5 * I) > 0.0 && std::abs(l[j] + 0.5 * I) > 0.0, "bae_residual_xxx: root at +-i/2");
        const Complex A = static_cast<double>(roots.L) * std::log((l[j] - 0.5 * I) / (l[j] + 0.5 * I));
        Complex B{0.0, 0.0};
        for (std::size_t k = 0; k < l.size(); ++k) {
            const Complex d = l[j] - l[k];
            require(std::abs(d + I) > 0.0, "bae_residual_xxx: pole l_j - l_k = -i");
            B += safe_log((d - I) / (d + I));
        }
        r = std::max(r, detail::exp_form_residual(A, B));
    }
    return r;
}

/// max_j |(1/pi) atan(2 l_j) - n_j/L + (N+1)/(2L) - sum_k atan(l_j - l_k)/(pi L)|
/// (offset adjusted for odd L, see detail::log_offset).
inline double logbae_residual(const RapiditySet& roots, const QuantumNumbers& q)
{
    const RVector x = detail::real_parts(roots);
    detail::check_qnums(q, roots.L, roots.N());
    const double L = roots.L;
    double r = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double f = std::atan(2.0 * x[j]) / pi - q.n[static_cast<std::size_t>(j)] / L + detail::log_offset(roots.L, roots.N());
        for (Eigen::Index k = 0; k < x.size(); ++k) f -= std::atan(x[j] - x[k]) / (pi * L);
        r = std::max(r, std::abs(f));
    }
    return r;
}

inline SolveReport solve_logbae(int L, int N, const QuantumNumbers& q, const NewtonOptions& opt = {})
{
    require(L >= 1 && N >= 0 && 2 * N <= L, "solve_logbae: need 0 <= N <= L/2");
    detail::check_qnums(q, L, N);
    const double dL = L;
    RVector rhs(N), x0(N);
    for (int j = 0; j < N; ++j) {
        rhs[j] = q.n[static_cast<std::size_t>(j)] / dL - detail::log_offset(L, N);
        x0[j] = 0.5 * std::tan(pi * std::clamp(rhs[j], -0.4999, 0.4999));
    }
    auto F = [&](const RVector& x, RVector& f) {
        for (int j = 0; j < N; ++j) {
            double s = std::atan(2.0 * x[j]) / pi - rhs[j];
            for (int k = 0; k < N; ++k) s -= std::atan(x[j] - x[k]) / (pi * dL);
            f[j] = s;
        }
    };
    auto J = [&](const RVector& x, RMatrix& jac) {
        jac.setZero();
        for (int j = 0; j < N; ++j) {
            jac(j, j) = 2.0 / (pi * (1.0 + 4.0 * x[j] * x[j]));
            for (int k = 0; k < N; ++k) {
                if (k == j) continue;
                const double d = x[j] - x[k];
                const double g = 1.0 / (pi * dL * (1.0 + d * d));
                jac(j, j) -= g;
                jac(j, k) += g;
            }
        }
    };
    NewtonResult nr = newton_solve(F, J, x0, opt);
    SolveReport rep;
    rep.roots = RapiditySet{Model::XXX, L, detail::to_complex(nr.x), {}};
    rep.qnums = q;
    rep.residual = nr.residual;
    rep.iterations = nr.iterations;
    rep.converged = nr.converged && detail::finite_roots(nr.x);
    return rep;
}

/// Exponential-form residual of the XXZ equations (Delta = cos gamma):
/// (sh(l_j - i g/2)/sh(l_j + i g/2))^L = -prod_{k=1}^N sh(l_j - l_k - i g)/sh(l_j - l_k + i g).
inline double bae_residual_xxz(const std::vector<Complex>& l, int L, double gamma)
{
    const Complex ig = I * gamma;
    double r = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
        const Complex den = std::sinh(l[j] + 0.5 * ig), num = std::sinh(l[j] - 0.5 * ig);
        require(std::abs(den) > 0.0 && std::abs(num) > 0.0, "bae_residual_xxz: pole");
        const Complex A = static_cast<double>(L) * std::log(num / den);
        Complex B{0.0, 0.0};
        for (std::size_t k = 0; k < l.size(); ++k) {
            const Complex d = l[j] - l[k];
            const Complex dd = std::sinh(d + ig);
            require(std::abs(dd) > 0.0, "bae_residual_xxz: pole");
            B += safe_log(std::sinh(d - ig) / dd);
        }
        r = std::max(r, detail::exp_form_residual(A, B));
    }
    return r;
}

/// Logarithmic XXZ equations for real roots, 0 < gamma < pi:
/// (1/pi) atan(cot(g/2) th l_j) = n_j/L - (N+1)/(2L) + sum_k atan(cot(g) th(l_j - l_k))/(pi L).
inline double logbae_residual_xxz(const RapiditySet& roots, double gamma, const QuantumNumbers& q)
{
    const RVector x = detail::real_parts(roots);
    detail::check_qnums(q, roots.L, roots.N());
    const double L = roots.L;
    const double a = 1.0 / std::tan(0.5 * gamma), b = 1.0 / std::tan(gamma);
    double r = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double f = std::atan(a * std::tanh(x[j])) / pi - q.n[static_cast<std::size_t>(j)] / L + detail::log_offset(roots.L, roots.N());
        for (Eigen::Index k = 0; k < x.size(); ++k) f -= std::atan(b * std::tanh(x[j] - x[k])) / (pi * L);
        r = std::max(r, std::abs(f));
    }
    return r;
}

inline SolveReport solve_logbae_xxz(int L, int N, double gamma, const QuantumNumbers& q, const NewtonOptions& opt = {})
{
    require(L >= 1 && N >= 0 && 2 * N <= L, "solve_logbae_xxz: need 0 <= N <= L/2");
    require(gamma > 0.0 && gamma < pi, "solve_logbae_xxz: need 0 < gamma < pi");
    detail::check_qnums(q, L, N);
    const double dL = L;
    const double a = 1.0 / std::tan(0.5 * gamma), b = 1.0 / std::tan(gamma);
    RVector rhs(N), x0(N);
    for (int j = 0; j < N; ++j) {
        rhs[j] = q.n[static_cast<std::size_t>(j)] / dL - detail::log_offset(L, N);
        const double t = std::tan(pi * std::clamp(rhs[j], -0.4999, 0.4999)) / a;
        x0[j] = std::atanh(std::clamp(t, -0.999, 0.999));
    }
    auto F = [&](const RVector& x, RVector& f) {
        for (int j = 0; j < N; ++j) {
            double s = std::atan(a * std::tanh(x[j])) / pi - rhs[j];
            for (int k = 0; k < N; ++k) s -= std::atan(b * std::tanh(x[j] - x[k])) / (pi * dL);
            f[j] = s;
        }
    };
    // d/dx atan(c th x) = c sech^2 x / (1 + c^2 th^2 x)
    auto datan = [](double c, double x) {
        const double t = std::tanh(x);
        return c * (1.0 - t * t) / (1.0 + c * c * t * t);
    };
    auto J = [&](const RVector& x, RMatrix& jac) {
        jac.setZero();
        for (int j = 0; j < N; ++j) {
            jac(j, j) = datan(a, x[j]) / pi;
            for (int k = 0; k < N; ++k) {
                if (k == j) continue;
                const double g = datan(b, x[j] - x[k]) / (pi * dL);
                jac(j, j) -= g;
                jac(j, k) += g;
            }
        }
    };
    NewtonResult nr = newton_solve(F, J, x0, opt);
    SolveReport rep;
    rep.roots = RapiditySet{Model::XXZ, L, detail::to_complex(nr.x), {}};
    rep.roots.params.gamma = gamma;
    rep.qnums = q;
    rep.residual = nr.residual;
    rep.iterations = nr.iterations;
    rep.converged = nr.converged && detail::finite_roots(nr.x);
    return rep;
}

/// Exponential-form residual of the Bose-gas equations
/// e^{i k_j L} = -prod_l (k_j - k_l + i c)/(k_j - k_l - i c).
inline double bae_residual_bose(const std::vector<Complex>& k, double ring, double c)
{
    double r = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
        const Complex A = I * k[j] * ring;
        Complex B{0.0, 0.0};
        for (std::size_t l = 0; l < k.size(); ++l) {
            const Complex d = k[j] - k[l];
            B += safe_log((d + I * c) / (d - I * c));
        }
        r = std::max(r, detail::exp_form_residual(A, B));
    }
    return r;
}

/// Real Bose-gas roots from the logarithmic equations
///   k_j L + 2 sum_l atan((k_j - k_l)/c) = 2 pi (n_j - (N+1)/2).
/// `ring` is the ring length; the report's L field carries its rounded value and
/// params.c the coupling.
inline SolveReport solve_bose(double ring, int N, double c, const QuantumNumbers& q, const NewtonOptions& opt = {})
{
    require(c > 0.0, "solve_bose: need c > 0");
    require(ring > 0.0 && N >= 0, "solve_bose: need positive ring length");
    require(static_cast<int>(q.n.size()) == N, "solve_bose: expected N quantum numbers");
    for (std::size_t i = 1; i < q.n.size(); ++i) require(q.n[i - 1] < q.n[i], "quantum numbers must be strictly increasing");
    RVector rhs(N), x0(N);
    for (int j = 0; j < N; ++j) {
        rhs[j] = 2.0 * pi * (q.n[static_cast<std::size_t>(j)] - 0.5 * (N + 1));
        x0[j] = rhs[j] / ring;
    }
    auto F = [&](const RVector& k, RVector& f) {
        for (int j = 0; j < N; ++j) {
            double s = k[j] * ring - rhs[j];
            for (int l = 0; l < N; ++l) s += 2.0 * std::atan((k[j] - k[l]) / c);
            f[j] = s;
        }
    };
    auto J = [&](const RVector& k, RMatrix& jac) {
        jac.setZero();
        for (int j = 0; j < N; ++j) {
            jac(j, j) = ring;
            for (int l = 0; l < N; ++l) {
                if (l == j) continue;
                const double d = k[j] - k[l];
                const double g = 2.0 * c / (c * c + d * d);
                jac(j, j) += g;
                jac(j, l) -= g;
            }
        }
    };
    NewtonOptions o = opt;
    o.tolerance = opt.tolerance * std::max(1.0, ring); // equations carry a factor L
    NewtonResult nr = newton_solve(F, J, x0, o);
    SolveReport rep;
    rep.roots = RapiditySet{Model::BOSE, static_cast<int>(std::lround(ring)), detail::to_complex(nr.x), {}};
    rep.roots.params.c = c;
    rep.qnums = QuantumNumbers{rep.roots.L, N, q.n};
    rep.residual = nr.residual;
    rep.iterations = nr.iterations;
    rep.converged = nr.converged;
    return rep;
}

/// Kinetic energy sum_j k_j^2 of a Bose-gas root set.
inline double energy_bose(const RapiditySet& roots)
{
    double e = 0.0;
    for (Complex k : roots.values) e += std::norm(k);
    return e;
}

struct Admissibility {
    bool admissible = true;
    std::vector<std::string> reasons;
};

/// Pairwise distinct, no difference +-i, no root at +-i/2 (tolerance 1e-8).
inline Admissibility admissibility(const RapiditySet& roots)
{
    require(roots.model == Model::XXX, "admissibility: XXX rapidities required");
    constexpr double tol = root_equality_tolerance;
    Admissibility a;
    auto flag = [&](const std::string& why) {
        a.admissible = false;
        if (std::find(a.reasons.begin(), a.reasons.end(), why) == a.reasons.end()) a.reasons.push_back(why);
    };
    const auto& l = roots.values;
    for (std::size_t j = 0; j < l.size(); ++j) {
        if (std::abs(l[j] - 0.5 * I) < tol || std::abs(l[j] + 0.5 * I) < tol) flag("root at +-i/2");
        for (std::size_t k = 0; k < l.size(); ++k) {
            if (k == j) continue;
            const Complex d = l[j] - l[k];
            if (k > j && std::abs(d) < tol) flag("coinciding roots");
            if (std::abs(d - I) < tol) flag("difference i");
        }
    }
    return a;
}

/// All converged real solutions of the logarithmic XXX equations whose quantum
/// numbers lie in [n_min, n_max], one per distinct root set.
inline std::vector<SolveReport> scan_real_solutions(int L, int N, int n_min, int n_max, double merge_tolerance = 1e-6)
{
    std::vector<SolveReport> out;
    if (N == 0) {
        out.push_back(solve_logbae(L, 0, QuantumNumbers{L, 0, {}}));
        return out;
    }
    std::vector<int> n(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) n[static_cast<std::size_t>(i)] = n_min + i;
    auto same = [&](const RapiditySet& a, const RapiditySet& b) {
        std::vector<double> x, y;
        for (auto v : a.values) x.push_back(v.real());
        for (auto v : b.values) y.push_back(v.real());
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i] - y[i]) > merge_tolerance) return false;
        return true;
    };
    while (n.back() <= n_max) {
        SolveReport r = solve_logbae(L, N, QuantumNumbers{L, N, n});
        if (r.converged && bae_residual_xxx(r.roots) < 1e-10) {
            bool dup = false;
            for (const auto& o : out) dup = dup || same(o.roots, r.roots);
            if (!dup) out.push_back(std::move(r));
        }
        // next strictly increasing tuple
        int i = N - 1;
        while (i >= 0 && n[static_cast<std::size_t>(i)] == n_max - (N - 1 - i)) --i;
        if (i < 0) break;
        ++n[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < N; ++k) n[static_cast<std::size_t>(k)] = n[static_cast<std::size_t>(k - 1)] + 1;
    }
    return out;
}

/// Quantum-number window that contains every finite real solution: each
/// (1/pi) atan term lies in (-1/2, 1/2) and the interaction sum in
/// (-(N-1)/(2L), (N-1)/(2L)).
inline std::pair<int, int> real_qnum_window(int L, int N)
{
    const int lo = static_cast<int>(std::floor(-0.5 * L + 0.5 * (N + 1) - 0.5 * (N - 1))) - 1;
    const int hi = static_cast<int>(std::ceil(0.5 * L + 0.5 * (N + 1) + 0.5 * (N - 1))) + 1;
    return {lo, hi};
}

enum class PairKind { real_pair, bound_pair };

inline std::string to_string(PairKind k) { return k == PairKind::real_pair ? "real-pair" : "bound-pair"; }

struct TwoMagnonSolution {
    RapiditySet roots;
    PairKind kind = PairKind::real_pair;
    double residual = 0.0;
};

struct TwoMagnonReport {
    std::vector<TwoMagnonSolution> solutions;
    int seeds_tried = 0;
    int unconverged_seeds = 0;
};

struct TwoMagnonOptions {
    double x_min = -3.0, x_max = 3.0, x_step = 0.1;
    std::vector<double> delta_seeds{0.5, 0.3, 0.7, 1.0};
    double merge_tolerance = 1e-6;
};

namespace detail {

/// Bound pair l = z, conj(z) with z = x + i y, y > 0. Both Bethe equations
/// reduce to h(z) = r(z)^L - (2y - 1)/(2y + 1) = 0 with r = (z - i/2)/(z + i/2).
inline NewtonResult solve_bound_pair(int L, double x0, double y0)
{
    auto h = [L](double x, double y) {
        const Complex z{x, y};
        return std::pow((z - 0.5 * I) / (z + 0.5 * I), L) - (2 * y - 1) / (2 * y + 1);
    };
    auto F = [&](const RVector& v, RVector& f) {
        const Complex g = h(v[0], v[1]);
        f[0] = g.real();
        f[1] = g.imag();
    };
    auto J = [&](const RVector& v, RMatrix& jac) {
        const Complex z{v[0], v[1]};
        const Complex r = (z - 0.5 * I) / (z + 0.5 * I);
        const Complex dz = static_cast<double>(L) * std::pow(r, L - 1) * I / ((z + 0.5 * I) * (z + 0.5 * I));
        const double dq = 4.0 / ((2 * v[1] + 1) * (2 * v[1] + 1));
        const Complex hx = dz, hy = I * dz - dq;
        jac(0, 0) = hx.real();
        jac(1, 0) = hx.imag();
        jac(0, 1) = hy.real();
        jac(1, 1) = hy.imag();
    };
    RVector s(2);
    s << x0, y0;
    NewtonOptions opt;
    opt.tolerance = 1e-13;
    return newton_solve(F, J, s, opt);
}

} // namespace detail

/// Enumerate N = 2 solutions of the XXX equations: real pairs from a scan of
/// quantum numbers, bound pairs from conjugate-pair seeds x +- i delta.
inline TwoMagnonReport classify_two_magnon(int L, const TwoMagnonOptions& opt = {})
{
    require(L % 2 == 0 && L >= 4 && L <= 16, "classify_two_magnon: need even 4 <= L <= 16");
    TwoMagnonReport rep;

    const auto [lo, hi] = real_qnum_window(L, 2);
    const int real_seeds = (hi - lo + 1) * (hi - lo) / 2;
    auto reals = scan_real_solutions(L, 2, lo, hi, opt.merge_tolerance);
    rep.seeds_tried += real_seeds;
    rep.unconverged_seeds += real_seeds - static_cast<int>(reals.size());
    for (auto& r : reals) {
        const double res = bae_residual_xxx(r.roots);
        rep.solutions.push_back({std::move(r.roots), PairKind::real_pair, res});
    }

    std::vector<Complex> found;
    const int nx = static_cast<int>(std::lround((opt.x_max - opt.x_min) / opt.x_step));
    for (double d0 : opt.delta_seeds) {
        for (int i = 0; i <= nx; ++i) {
            ++rep.seeds_tried;
            const double x0 = opt.x_min + i * opt.x_step;
            NewtonResult nr = detail::solve_bound_pair(L, x0, d0);
            const Complex z{nr.x[0], std::abs(nr.x[1])};
            const bool ok = nr.converged && std::abs(z) < root_divergence_cap && z.imag() > opt.merge_tolerance &&
                            std::abs(z.imag() - 0.5) > opt.merge_tolerance;
            if (!ok) {
                ++rep.unconverged_seeds;
                continue;
            }
            RapiditySet rs = xxx_roots(L, {z, std::conj(z)});
            const double res = bae_residual_xxx(rs);
            if (res >= 1e-10) {
                ++rep.unconverged_seeds;
                continue;
            }
            bool dup = false;
            for (Complex f : found) dup = dup || std::abs(f - z) < opt.merge_tolerance;
            if (dup) continue;
            found.push_back(z);
            rep.solutions.push_back({std::move(rs), PairKind::bound_pair, res});
        }
    }
    return rep;
}

} // namespace bethe
