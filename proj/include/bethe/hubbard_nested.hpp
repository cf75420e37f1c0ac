#pragma once

// Nested Bethe ansatz for the periodic one-dimensional Hubbard model
//   H = - sum_{j,a} (c+_{j,a} c_{j+1,a} + h.c.) + u sum_j (1 - 2 n_{j,up})(1 - 2 n_{j,dn}).
//
// Orbitals are numbered o = 2 (x - 1) + (a == down), site-major with up before
// down. A basis state is the occupation word n (bit o set when orbital o is
// filled) and stands for c+_{o_N} ... c+_{o_1} |0> with o_1 < ... < o_N, i.e.
// the Wannier state |x, a> with coordinates listed in orbital order.

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include "bethe_equations.hpp"
#include "core.hpp"
#include "newton.hpp"
#include "permutations.hpp"
#include "spinchain_ed.hpp"

namespace bethe {

enum class Spin { up = 0, down = 1 };

inline int orbital(int x, Spin a) { return 2 * (x - 1) + static_cast<int>(a); }

/// Occupation words of 2L orbitals with N electrons, M of them spin down.
class FermionBasis {
public:
    FermionBasis(int L, int N, int M) : L_(L), N_(N), M_(M)
    {
        require(L >= 1 && L <= 12, "FermionBasis: need 1 <= L <= 12");
        require(N >= 0 && M >= 0 && M <= N && N - M <= L && M <= L, "FermionBasis: electron counts out of range");
        SectorBasis ups(L, N - M), downs(L, M);
        for (std::uint64_t su : ups.states())
            for (std::uint64_t sd : downs.states()) {
                std::uint64_t w = 0;
                for (int j = 0; j < L; ++j) {
                    if ((su >> j) & 1U) w |= std::uint64_t{1} << (2 * j);
                    if ((sd >> j) & 1U) w |= std::uint64_t{1} << (2 * j + 1);
                }
                states_.push_back(w);
            }
        std::sort(states_.begin(), states_.end());
    }

    int length() const { return L_; }
    int electrons() const { return N_; }
    int down_spins() const { return M_; }
    std::size_t size() const { return states_.size(); }
    std::uint64_t state(std::size_t i) const { return states_[i]; }
    const std::vector<std::uint64_t>& states() const { return states_; }

    std::optional<std::size_t> find(std::uint64_t w) const
    {
        auto it = std::lower_bound(states_.begin(), states_.end(), w);
        if (it == states_.end() || *it != w) return std::nullopt;
        return static_cast<std::size_t>(it - states_.begin());
    }

    /// Coordinates and spins (x_j, a_j) of state i in orbital order.
    std::pair<std::vector<int>, std::vector<Spin>> configuration(std::size_t i) const
    {
        std::vector<int> x;
        std::vector<Spin> a;
        for (int o = 0; o < 2 * L_; ++o)
            if ((states_[i] >> o) & 1U) {
                x.push_back(o / 2 + 1);
                a.push_back(o % 2 ? Spin::down : Spin::up);
            }
        return {x, a};
    }

private:
    int L_, N_, M_;
    std::vector<std::uint64_t> states_;
};

namespace detail {

/// (-1)^(number of occupied orbitals above o).
inline int fermion_sign_above(std::uint64_t w, int o)
{
    return popcount(w >> (o + 1)) % 2 ? -1 : 1;
}

/// c+_p c_q on word w; returns the sign (0 if the result vanishes) and the new word.
inline std::pair<int, std::uint64_t> hop(std::uint64_t w, int p, int q)
{
    if (!((w >> q) & 1U)) return {0, w};
    int s = fermion_sign_above(w, q);
    w ^= std::uint64_t{1} << q;
    if ((w >> p) & 1U) return {0, w};
    s *= fermion_sign_above(w, p);
    w |= std::uint64_t{1} << p;
    return {s, w};
}

/// Sort orbitals into ascending order and return the parity of the sorting permutation.
inline int sort_with_sign(std::vector<int>& orbs)
{
    int inversions = 0;
    for (std::size_t i = 0; i < orbs.size(); ++i)
        for (std::size_t j = i + 1; j < orbs.size(); ++j) inversions += orbs[i] > orbs[j];
    std::sort(orbs.begin(), orbs.end());
    return inversions % 2 ? -1 : 1;
}

} // namespace detail

struct HubbardOperator {
    std::shared_ptr<const FermionBasis> basis;
    OperatorMatrix matrix; // matrix.basis stays null; rows follow `basis`
};

/// Hubbard Hamiltonian on the (N, M) block. At L = 1 the bond j -> j+1 would
/// be a self-loop and is omitted, leaving the interaction term only.
inline HubbardOperator build_hubbard_hamiltonian(int L, double u, int N, int M)
{
    require(L >= 1 && L <= 8, "build_hubbard_hamiltonian: need 1 <= L <= 8");
    auto basis = std::make_shared<const FermionBasis>(L, N, M);
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::size_t i = 0; i < basis->size(); ++i) {
        const std::uint64_t w = basis->state(i);
        double diag = 0.0;
        for (int j = 0; j < L; ++j) {
            const int nu = (w >> (2 * j)) & 1U, nd = (w >> (2 * j + 1)) & 1U;
            diag += (1 - 2 * nu) * (1 - 2 * nd);
        }
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), u * diag);
        if (L == 1) continue;
        for (int j = 1; j <= L; ++j) {
            const int k = j % L + 1;
            for (Spin a : {Spin::up, Spin::down}) {
                const int p = orbital(j, a), q = orbital(k, a);
                for (auto [from, to] : {std::pair{q, p}, std::pair{p, q}}) {
                    auto [s, w2] = detail::hop(w, to, from);
                    if (s == 0) continue;
                    trip.emplace_back(static_cast<int>(*basis->find(w2)), static_cast<int>(i), -1.0 * s);
                }
            }
        }
    }
    HubbardOperator h;
    h.basis = basis;
    h.matrix.L = L;
    h.matrix.entries.resize(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
    h.matrix.entries.setFromTriplets(trip.begin(), trip.end());
    h.matrix.hermitian = true;
    return h;
}

/// Translation c+_{x,a} -> c+_{x+1,a} on the (N, M) block.
inline HubbardOperator build_hubbard_translation(int L, int N, int M)
{
    auto basis = std::make_shared<const FermionBasis>(L, N, M);
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::size_t i = 0; i < basis->size(); ++i) {
        auto [x, a] = basis->configuration(i);
        std::vector<int> orbs;
        for (std::size_t j = 0; j < x.size(); ++j) orbs.push_back(orbital(x[j] % L + 1, a[j]));
        const int s = detail::sort_with_sign(orbs);
        std::uint64_t w = 0;
        for (int o : orbs) w |= std::uint64_t{1} << o;
        trip.emplace_back(static_cast<int>(*basis->find(w)), static_cast<int>(i), static_cast<double>(s));
    }
    HubbardOperator t;
    t.basis = basis;
    t.matrix.L = L;
    t.matrix.entries.resize(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
    t.matrix.entries.setFromTriplets(trip.begin(), trip.end());
    return t;
}

/// S+ = sum_j c+_{j,up} c_{j,down} applied to a vector of the (N, M) block; result in (N, M-1).
inline CVector apply_spin_raise(const FermionBasis& from, const CVector& v)
{
    require(from.down_spins() >= 1, "apply_spin_raise: no down spin to flip");
    FermionBasis to(from.length(), from.electrons(), from.down_spins() - 1);
    CVector out = CVector::Zero(static_cast<Eigen::Index>(to.size()));
    for (std::size_t i = 0; i < from.size(); ++i)
        for (int j = 1; j <= from.length(); ++j) {
            auto [s, w2] = detail::hop(from.state(i), orbital(j, Spin::up), orbital(j, Spin::down));
            if (s != 0) out[static_cast<Eigen::Index>(*to.find(w2))] += static_cast<double>(s) * v[static_cast<Eigen::Index>(i)];
        }
    return out;
}

/// Charge momenta k (N) and spin rapidities lambda (M) at coupling u.
struct NestedRoots {
    int L = 0;
    double u = 1.0;
    std::vector<Complex> k;
    std::vector<Complex> lambda;

    int N() const { return static_cast<int>(k.size()); }
    int M() const { return static_cast<int>(lambda.size()); }
};

namespace detail {

inline void check_nested(const NestedRoots& r)
{
    require(r.L >= 1, "nested roots: need L >= 1");
    require(2 * r.M() <= r.N() && r.N() <= 2 * r.L, "nested roots: need 2M <= N");
    require(r.u != 0.0, "nested roots: need u != 0");
}

inline Complex checked_ratio(Complex num, Complex den, const char* what)
{
    if (std::abs(den) < 1e-300) throw DomainError(std::string(what) + ": pole configuration");
    return num / den;
}

} // namespace detail

/// Lieb-Wu residual: max over both equation families of |log LHS - log RHS|
/// with the phase difference reduced to (-pi, pi].
inline double liebwu_residual(const NestedRoots& r)
{
    detail::check_nested(r);
    const Complex iu = I * r.u;
    double res = 0.0;
    for (Complex k : r.k) {
        Complex d = I * k * static_cast<double>(r.L);
        for (Complex l : r.lambda) d -= std::log(detail::checked_ratio(l - std::sin(k) - iu, l - std::sin(k) + iu, "liebwu_residual"));
        res = std::max(res, std::abs(wrapped(d)));
    }
    for (std::size_t a = 0; a < r.lambda.size(); ++a) {
        const Complex l = r.lambda[a];
        Complex d{0.0};
        for (Complex k : r.k) d += std::log(detail::checked_ratio(l - std::sin(k) - iu, l - std::sin(k) + iu, "liebwu_residual"));
        for (std::size_t b = 0; b < r.lambda.size(); ++b)
            if (b != a) d -= std::log(detail::checked_ratio(l - r.lambda[b] - 2.0 * iu, l - r.lambda[b] + 2.0 * iu, "liebwu_residual"));
        res = std::max(res, std::abs(wrapped(d)));
    }
    return res;
}

/// Integer quantum numbers of the logarithmic Lieb-Wu equations
///   k_j L = 2 pi n_j + M pi + sum_l 2 atan((lambda_l - sin k_j)/u)
///   sum_j 2 atan((lambda_l - sin k_j)/u) = 2 pi m_l + pi (M - 1 - N) + sum_m 2 atan((lambda_l - lambda_m)/(2u)).
struct LiebWuQuantumNumbers {
    std::vector<int> n; // N charge numbers
    std::vector<int> m; // M spin numbers
};

struct LiebWuReport {
    NestedRoots roots;
    LiebWuQuantumNumbers qnums;
    double residual = 0.0;     // liebwu_residual of the result
    double log_residual = 0.0; // max-norm of the logarithmic equations
    int iterations = 0;
    bool converged = false;
    // momenta pairwise distinct mod 2 pi and rapidities pairwise distinct; a
    // converged but inadmissible solution does not describe an eigenstate
    bool admissible = false;
};

/// Spin numbers of the lowest state in the block: the antiferromagnetic
/// ground state of the N-site spin chain seen by the rapidities.
inline LiebWuQuantumNumbers liebwu_ground_state_qnums(int L, int N, int M)
{
    require(2 * M <= N && N <= L, "liebwu_ground_state_qnums: need 2M <= N <= L");
    LiebWuQuantumNumbers q;
    // charge numbers centred so that k_j = 2 pi (n_j + M/2)/L is as symmetric as possible
    const int shift = N > 0 ? (N + M - 1) / 2 : 0;
    for (int j = 0; j < N; ++j) q.n.push_back(j - shift);
    // m_l = l - M + (N + N mod 2)/2 maps onto the XXX ground state n = 1..M of an N-site chain
    for (int l = 1; l <= M; ++l) q.m.push_back(l - M + (N + N % 2) / 2);
    return q;
}

inline LiebWuReport solve_liebwu(int L, int N, int M, double u, const LiebWuQuantumNumbers& q,
                                 std::optional<std::vector<double>> lambda_seed = std::nullopt, const NewtonOptions& opt = {})
{
    require(L >= 1 && 2 * M <= N && N <= L, "solve_liebwu: need 2M <= N <= L");
    require(u > 0.0, "solve_liebwu: need u > 0");
    require(static_cast<int>(q.n.size()) == N && static_cast<int>(q.m.size()) == M, "solve_liebwu: quantum number count mismatch");
    const double dL = L;
    RVector x0(N + M);
    for (int j = 0; j < N; ++j) x0[j] = 2.0 * pi * (q.n[static_cast<std::size_t>(j)] + 0.5 * M) / dL;
    if (lambda_seed) {
        require(static_cast<int>(lambda_seed->size()) == M, "solve_liebwu: lambda seed size mismatch");
        for (int l = 0; l < M; ++l) x0[N + l] = (*lambda_seed)[static_cast<std::size_t>(l)];
    } else if (M > 0) {
        // u -> infinity: lambda/(2u) solves the XXX equations of an N-site chain with M magnons
        QuantumNumbers xq{N, M, {}};
        for (int l = 0; l < M; ++l) xq.n.push_back(q.m[static_cast<std::size_t>(l)] + M - (N + N % 2) / 2);
        std::optional<SolveReport> xr;
        try {
            xr = solve_logbae(N, M, xq);
        } catch (const DomainError&) {
        }
        for (int l = 0; l < M; ++l) x0[N + l] = xr && xr->converged ? 2.0 * u * xr->roots.values[static_cast<std::size_t>(l)].real() : 0.0;
    }
    auto F = [&](const RVector& x, RVector& f) {
        for (int j = 0; j < N; ++j) {
            double s = x[j] * dL - 2.0 * pi * q.n[static_cast<std::size_t>(j)] - M * pi;
            for (int l = 0; l < M; ++l) s -= 2.0 * std::atan((x[N + l] - std::sin(x[j])) / u);
            f[j] = s;
        }
        for (int l = 0; l < M; ++l) {
            double s = -2.0 * pi * q.m[static_cast<std::size_t>(l)] - pi * (M - 1 - N);
            for (int j = 0; j < N; ++j) s += 2.0 * std::atan((x[N + l] - std::sin(x[j])) / u);
            for (int m = 0; m < M; ++m)
                if (m != l) s -= 2.0 * std::atan((x[N + l] - x[N + m]) / (2.0 * u));
            f[N + l] = s;
        }
    };
    auto J = [&](const RVector& x, RMatrix& jac) {
        jac.setZero();
        for (int j = 0; j < N; ++j) {
            jac(j, j) = dL;
            for (int l = 0; l < M; ++l) {
                const double t = (x[N + l] - std::sin(x[j])) / u;
                const double g = 2.0 / (u * (1.0 + t * t));
                jac(j, j) += g * std::cos(x[j]);
                jac(j, N + l) -= g;
                jac(N + l, j) -= g * std::cos(x[j]);
                jac(N + l, N + l) += g;
            }
        }
        for (int l = 0; l < M; ++l)
            for (int m = 0; m < M; ++m) {
                if (m == l) continue;
                const double t = (x[N + l] - x[N + m]) / (2.0 * u);
                const double g = 1.0 / (u * (1.0 + t * t));
                jac(N + l, N + l) -= g;
                jac(N + l, N + m) += g;
            }
    };
    NewtonResult nr = newton_solve(F, J, x0, opt);
    LiebWuReport rep;
    rep.qnums = q;
    rep.roots.L = L;
    rep.roots.u = u;
    for (int j = 0; j < N; ++j) rep.roots.k.emplace_back(nr.x[j], 0.0);
    for (int l = 0; l < M; ++l) rep.roots.lambda.emplace_back(nr.x[N + l], 0.0);
    rep.log_residual = nr.residual;
    rep.iterations = nr.iterations;
    rep.converged = nr.converged && nr.x.allFinite();
    rep.residual = rep.converged ? liebwu_residual(rep.roots) : std::numeric_limits<double>::infinity();
    rep.converged = rep.converged && rep.residual < 1e-10;
    rep.admissible = rep.converged;
    for (int i = 0; i < N && rep.admissible; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::abs(wrap_pi(nr.x[i] - nr.x[j])) < 1e-8) rep.admissible = false;
    for (int a = 0; a < M && rep.admissible; ++a)
        for (int b = a + 1; b < M; ++b)
            if (std::abs(nr.x[N + a] - nr.x[N + b]) < 1e-8) rep.admissible = false;
    return rep;
}

inline constexpr int max_nested_electrons = 6;
inline constexpr int max_nested_down_spins = 2;

namespace detail {

/// A(lambda) = prod_{m<n} (l_m - l_n - 2iu)/(l_m - l_n).
inline Complex spin_a_factor(const std::vector<Complex>& l, double u)
{
    Complex p{1.0};
    for (std::size_t m = 0; m < l.size(); ++m)
        for (std::size_t n = m + 1; n < l.size(); ++n)
            p *= checked_ratio(l[m] - l[n] - 2.0 * I * u, l[m] - l[n], "nested_wavefunction");
    return p;
}

/// F_k(l; y) = 2iu/(l - sin k_y + iu) prod_{j<y} (l - sin k_j - iu)/(l - sin k_j + iu), y 1-based.
inline Complex f_factor(const std::vector<Complex>& sin_k, Complex l, int y, double u)
{
    const Complex iu = I * u;
    Complex p = checked_ratio(2.0 * iu, l - sin_k[static_cast<std::size_t>(y - 1)] + iu, "nested_wavefunction");
    for (int j = 0; j < y - 1; ++j)
        p *= checked_ratio(l - sin_k[static_cast<std::size_t>(j)] - iu, l - sin_k[static_cast<std::size_t>(j)] + iu, "nested_wavefunction");
    return p;
}

/// <aQ | kP, lambda>, with aQ given as down-spin positions y (1-based) and kP as sin of permuted momenta.
inline Complex spin_amplitude(const std::vector<int>& y, const std::vector<Complex>& sin_kp, const NestedRoots& r)
{
    Complex amp{0.0};
    const int M = r.M();
    for_each_permutation(M, [&](const std::vector<int>& R, int) {
        std::vector<Complex> lr;
        for (int l = 0; l < M; ++l) lr.push_back(r.lambda[static_cast<std::size_t>(R[static_cast<std::size_t>(l)])]);
        Complex t = spin_a_factor(lr, r.u);
        for (int l = 0; l < M; ++l) t *= f_factor(sin_kp, lr[static_cast<std::size_t>(l)], y[static_cast<std::size_t>(l)], r.u);
        amp += t;
    });
    return amp;
}

} // namespace detail

/// Sector permutation Q (0-based images) with x_{Q(1)} <= ... <= x_{Q(N)}; ties keep index order.
inline std::vector<int> sector_of(const std::vector<int>& x)
{
    std::vector<int> Q(x.size());
    std::iota(Q.begin(), Q.end(), 0);
    std::stable_sort(Q.begin(), Q.end(), [&](int i, int j) { return x[static_cast<std::size_t>(i)] < x[static_cast<std::size_t>(j)]; });
    return Q;
}

/// Psi(x; a | k; lambda) evaluated with the sector-Q formula for an explicit Q.
inline Complex nested_wavefunction_in_sector(const std::vector<int>& x, const std::vector<Spin>& a, const std::vector<int>& Q,
                                             const NestedRoots& r)
{
    const int N = r.N();
    std::vector<int> y;
    for (int j = 0; j < N; ++j)
        if (a[static_cast<std::size_t>(Q[static_cast<std::size_t>(j)])] == Spin::down) y.push_back(j + 1);
    if (static_cast<int>(y.size()) != r.M()) return 0.0;
    const int sq = permutation_sign(Q);
    Complex psi{0.0};
    for_each_permutation(N, [&](const std::vector<int>& P, int sp) {
        std::vector<Complex> sin_kp;
        Complex phase{0.0};
        for (int j = 0; j < N; ++j) {
            const Complex kp = r.k[static_cast<std::size_t>(P[static_cast<std::size_t>(j)])];
            sin_kp.push_back(std::sin(kp));
            phase += kp * static_cast<double>(x[static_cast<std::size_t>(Q[static_cast<std::size_t>(j)])]);
        }
        psi += static_cast<double>(sp * sq) * detail::spin_amplitude(y, sin_kp, r) * std::exp(I * phase);
    });
    return psi;
}

/// Psi(x; a | k; lambda) in its own sector.
inline Complex nested_wavefunction(const std::vector<int>& x, const std::vector<Spin>& a, const NestedRoots& r)
{
    detail::check_nested(r);
    require(r.N() <= max_nested_electrons && r.M() <= max_nested_down_spins, "nested_wavefunction: need N <= 6, M <= 2");
    require(x.size() == a.size() && static_cast<int>(x.size()) == r.N(), "nested_wavefunction: need N coordinates and spins");
    for (int xi : x) require(xi >= 1 && xi <= r.L, "nested_wavefunction: coordinate out of range");
    return nested_wavefunction_in_sector(x, a, sector_of(x), r);
}

/// Coefficients of the Bethe state on the (N, M) block basis (unnormalized).
inline CVector nested_state(const NestedRoots& r, const FermionBasis& basis)
{
    require(basis.length() == r.L && basis.electrons() == r.N() && basis.down_spins() == r.M(), "nested_state: basis does not match roots");
    CVector v(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto [x, a] = basis.configuration(i);
        v[static_cast<Eigen::Index>(i)] = nested_wavefunction(x, a, r);
    }
    return v;
}

/// E = -2 sum cos k_j + u (L - 2N), P = [sum k_j] mod 2 pi.
inline std::pair<Complex, double> energy_momentum(const NestedRoots& r)
{
    Complex E = r.u * static_cast<double>(r.L - 2 * r.N());
    double P = 0.0;
    for (Complex k : r.k) {
        E -= 2.0 * std::cos(k);
        P += k.real();
    }
    return {E, mod_two_pi(P)};
}

} // namespace bethe
