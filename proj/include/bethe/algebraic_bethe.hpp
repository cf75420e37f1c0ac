#pragma once

// Algebraic Bethe ansatz on the six-vertex monodromy: A, B, C, D blocks,
// B-product states, transfer eigenvalues, the off-shell action and the
// normalized Slavnov pairing formula.
//
// Convention: homogeneous chains use xi_j = eta/2, so that
//   a(l) = rho^L sh^L(l + eta/2),  d(l) = rho^L sh^L(l - eta/2)
// and t_aba(l) = t_6v(l - eta/2) with the sixvertex homogeneous default xi_j = 0.

#include <optional>
#include <vector>

#include "sixvertex.hpp"

namespace bethe {

/// a(l) = rho^L prod_j sh(l - xi_j + eta),  d(l) = rho^L prod_j sh(l - xi_j).
struct VacuumFunctions {
    int L = 0;
    Complex rho{1.0};
    Complex eta{0.0};
    std::vector<Complex> xi;

    static VacuumFunctions homogeneous(int L, Complex eta, Complex rho = 1.0)
    {
        return {L, rho, eta, std::vector<Complex>(static_cast<std::size_t>(L), 0.5 * eta)};
    }

    static VacuumFunctions inhomogeneous(Complex eta, std::vector<Complex> xi, Complex rho = 1.0)
    {
        const int L = static_cast<int>(xi.size());
        return {L, rho, eta, std::move(xi)};
    }

    Complex a(Complex l) const { return product(l, eta); }
    Complex d(Complex l) const { return product(l, 0.0); }
    Complex a_prime(Complex l) const { return product_derivative(l, eta); }
    Complex d_prime(Complex l) const { return product_derivative(l, 0.0); }

    VertexWeights weights() const { return VertexWeights::parameterized(rho, 0.0, eta, xi); }

private:
    Complex product(Complex l, Complex shift) const
    {
        Complex p = std::pow(rho, L);
        for (Complex x : xi) p *= std::sinh(l - x + shift);
        return p;
    }

    Complex product_derivative(Complex l, Complex shift) const
    {
        Complex s{0.0};
        for (std::size_t j = 0; j < xi.size(); ++j) {
            Complex p = std::cosh(l - xi[j] + shift);
            for (std::size_t k = 0; k < xi.size(); ++k)
                if (k != j) p *= std::sinh(l - xi[k] + shift);
            s += p;
        }
        return std::pow(rho, L) * s;
    }
};

struct MonodromyBlocks {
    Complex lambda{0.0};
    CMatrix A, B, C, D;
};

inline constexpr int max_dense_block_length = 10;

/// Dense A, B, C, D at l (L <= 10; use `Monodromy::apply_block` above that).
inline MonodromyBlocks monodromy_blocks(Complex lambda, const VacuumFunctions& vac)
{
    require(vac.L >= 1 && vac.L <= max_dense_block_length, "monodromy_blocks: dense blocks need 1 <= L <= 10");
    Monodromy T(lambda, vac.L, vac.weights());
    const CMatrix m = T.dense();
    const Eigen::Index d = Eigen::Index{1} << vac.L;
    return {lambda, m.block(0, 0, d, d), m.block(0, d, d, d), m.block(d, 0, d, d), m.block(d, d, d, d)};
}

/// The all-up pseudo vacuum |0>.
inline CVector pseudo_vacuum(int L)
{
    CVector v = CVector::Zero(Eigen::Index{1} << L);
    v[0] = 1.0;
    return v;
}

/// B(l_1) ... B(l_N) |0> on the full 2^L space.
inline CVector b_product_state(const std::vector<Complex>& roots, const VacuumFunctions& vac)
{
    require(static_cast<int>(roots.size()) <= vac.L, "b_product_state: need N <= L");
    require(vac.L <= 12, "b_product_state: need L <= 12");
    const VertexWeights w = vac.weights();
    CVector v = pseudo_vacuum(vac.L);
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) v = Monodromy(*it, vac.L, w).apply_block(0, 1, v);
    return v;
}

/// <0| C(m_1) ... C(m_N) as a row vector on the full 2^L space.
inline CVector c_product_state(const std::vector<Complex>& mus, const VacuumFunctions& vac)
{
    require(static_cast<int>(mus.size()) <= vac.L, "c_product_state: need N <= L");
    require(vac.L <= 12, "c_product_state: need L <= 12");
    const VertexWeights w = vac.weights();
    std::vector<Monodromy> Ts;
    for (Complex m : mus) Ts.emplace_back(m, vac.L, w);
    SectorBasis sector(vac.L, static_cast<int>(mus.size()));
    CVector row = CVector::Zero(Eigen::Index{1} << vac.L);
    CVector e = CVector::Zero(row.size());
    for (std::size_t i = 0; i < sector.size(); ++i) {
        const auto s = static_cast<Eigen::Index>(sector.state(i));
        e[s] = 1.0;
        CVector v = e;
        for (auto it = Ts.rbegin(); it != Ts.rend(); ++it) v = it->apply_block(1, 0, v);
        row[s] = v[0];
        e[s] = 0.0;
    }
    return row;
}

/// Bilinear pairing <0| C(m_1) ... C(m_N) v.
inline Complex c_pairing(const std::vector<Complex>& mus, const VacuumFunctions& vac, const CVector& v)
{
    const VertexWeights w = vac.weights();
    CVector cur = v;
    for (auto it = mus.rbegin(); it != mus.rend(); ++it) cur = Monodromy(*it, vac.L, w).apply_block(1, 0, cur);
    return cur[0];
}

/// Q(l|{nu}) = prod sh(l - nu).
inline Complex q_function(Complex lambda, const std::vector<Complex>& roots)
{
    Complex q{1.0};
    for (Complex r : roots) q *= std::sinh(lambda - r);
    return q;
}

/// d/dl Q(l|{nu}).
inline Complex q_function_prime(Complex lambda, const std::vector<Complex>& roots)
{
    Complex s{0.0};
    for (std::size_t j = 0; j < roots.size(); ++j) {
        Complex p = std::cosh(lambda - roots[j]);
        for (std::size_t k = 0; k < roots.size(); ++k)
            if (k != j) p *= std::sinh(lambda - roots[k]);
        s += p;
    }
    return s;
}

inline constexpr double pole_guard = 1e-6;

/// Lambda(l|{nu}) = [a(l) Q(l - eta) + d(l) Q(l + eta)] / Q(l).
/// At a root the pole is removable when the residue vanishes (on-shell); the
/// limit is then taken by l'Hopital. Otherwise a root is a genuine pole.
inline Complex transfer_eigenvalue(Complex lambda, const std::vector<Complex>& roots, const VacuumFunctions& vac)
{
    const Complex qm = q_function(lambda - vac.eta, roots), qp = q_function(lambda + vac.eta, roots);
    for (Complex r : roots)
        if (std::abs(std::sinh(lambda - r)) < 1e-12) {
            const Complex u = vac.a(lambda) * qm, v = vac.d(lambda) * qp;
            if (std::abs(u + v) > 1e-10 * (std::abs(u) + std::abs(v))) throw DomainError("transfer_eigenvalue: pole at a root");
            const Complex dnum = vac.a_prime(lambda) * qm + vac.a(lambda) * q_function_prime(lambda - vac.eta, roots) +
                                 vac.d_prime(lambda) * qp + vac.d(lambda) * q_function_prime(lambda + vac.eta, roots);
            return dnum / q_function_prime(lambda, roots);
        }
    return (vac.a(lambda) * qm + vac.d(lambda) * qp) / q_function(lambda, roots);
}

/// d/dl Lambda(l|{nu}).
inline Complex transfer_eigenvalue_prime(Complex lambda, const std::vector<Complex>& roots, const VacuumFunctions& vac)
{
    const Complex Q = q_function(lambda, roots);
    const Complex qm = q_function(lambda - vac.eta, roots), qp = q_function(lambda + vac.eta, roots);
    const Complex num = vac.a(lambda) * qm + vac.d(lambda) * qp;
    const Complex dnum = vac.a_prime(lambda) * qm + vac.a(lambda) * q_function_prime(lambda - vac.eta, roots) +
                         vac.d_prime(lambda) * qp + vac.d(lambda) * q_function_prime(lambda + vac.eta, roots);
    return dnum / Q - num * q_function_prime(lambda, roots) / (Q * Q);
}

/// XXZ energy (Delta = ch eta) from the logarithmic derivative of Lambda at l = eta/2:
/// E = J [ (sh eta / 2) Lambda'/Lambda - Delta L / 2 ].
inline Complex energy_from_eigenvalue(const std::vector<Complex>& roots, const VacuumFunctions& vac, double J = 1.0)
{
    const Complex l0 = 0.5 * vac.eta;
    const Complex ld = transfer_eigenvalue_prime(l0, roots, vac) / transfer_eigenvalue(l0, roots, vac);
    return J * (0.5 * std::sinh(vac.eta) * ld - 0.5 * std::cosh(vac.eta) * static_cast<double>(vac.L));
}

/// Relative residual of a(l_j) Q(l_j - eta|{l}) + d(l_j) Q(l_j + eta|{l}) = 0.
inline double q_bae_residual(const std::vector<Complex>& roots, const VacuumFunctions& vac)
{
    double r = 0.0;
    for (Complex l : roots) {
        const Complex u = vac.a(l) * q_function(l - vac.eta, roots), v = vac.d(l) * q_function(l + vac.eta, roots);
        const double scale = std::abs(u) + std::abs(v);
        r = std::max(r, scale > 0.0 ? std::abs(u + v) / scale : 0.0);
    }
    return r;
}

namespace detail {

inline std::vector<Complex> without(const std::vector<Complex>& v, std::size_t skip)
{
    std::vector<Complex> out;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (j != skip) out.push_back(v[j]);
    return out;
}

inline void check_distinct(const std::vector<Complex>& v, const char* what)
{
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t k = j + 1; k < v.size(); ++k)
            if (std::abs(v[j] - v[k]) < pole_guard) throw DomainError(std::string(what) + ": coincident parameters");
}

/// Coefficient of B({l}_j) in t(l_ell) B({l}_ell).
inline Complex action_coefficient(const std::vector<Complex>& l, std::size_t ell, std::size_t j, const VacuumFunctions& vac)
{
    const auto rest_ell = without(l, ell), rest_j = without(l, j);
    return (vac.a(l[j]) * q_function(l[j] - vac.eta, rest_ell) + vac.d(l[j]) * q_function(l[j] + vac.eta, rest_ell)) /
           q_function(l[j], rest_j);
}

/// Apply t(l) = A(l) + D(l) to a full-space vector.
inline CVector apply_transfer(Complex lambda, const VacuumFunctions& vac, const CVector& v)
{
    Monodromy T(lambda, vac.L, vac.weights());
    return T.apply_block(0, 0, v) + T.apply_block(1, 1, v);
}

/// log det M (log magnitude + i phase) via partial-pivot LU.
inline Complex log_det(const CMatrix& m)
{
    Eigen::PartialPivLU<CMatrix> lu(m);
    const CMatrix& U = lu.matrixLU();
    Complex s{0.0};
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        if (U(i, i) == Complex(0.0)) throw DomainError("slavnov: singular determinant");
        s += std::log(U(i, i));
    }
    if (lu.permutationP().determinant() < 0) s += Complex(0.0, pi);
    return s;
}

} // namespace detail

/// max-norm of t(l_ell) B({l}_ell) - sum_j coeff_j B({l}_j), relative to the left side.
inline double offshell_action_residual(const std::vector<Complex>& lams, std::size_t ell, const VacuumFunctions& vac)
{
    require(ell < lams.size(), "offshell_action_residual: index out of range");
    detail::check_distinct(lams, "offshell_action_residual");
    const CVector lhs = detail::apply_transfer(lams[ell], vac, b_product_state(detail::without(lams, ell), vac));
    CVector rhs = CVector::Zero(lhs.size());
    for (std::size_t j = 0; j < lams.size(); ++j)
        rhs += detail::action_coefficient(lams, ell, j, vac) * b_product_state(detail::without(lams, j), vac);
    return (lhs - rhs).cwiseAbs().maxCoeff() / std::max(lhs.cwiseAbs().maxCoeff(), 1e-300);
}

/// Dual version: C({m}_ell) t(m_ell) - sum_j C({m}_j) coeff_j, relative.
inline double dual_action_residual(const std::vector<Complex>& mus, std::size_t ell, const VacuumFunctions& vac)
{
    require(ell < mus.size(), "dual_action_residual: index out of range");
    require(vac.L <= max_dense_block_length, "dual_action_residual: need L <= 10");
    detail::check_distinct(mus, "dual_action_residual");
    const CVector row = c_product_state(detail::without(mus, ell), vac);
    Monodromy T(mus[ell], vac.L, vac.weights());
    const CVector lhs = (row.transpose() * (T.block(0, 0) + T.block(1, 1))).transpose();
    CVector rhs = CVector::Zero(lhs.size());
    for (std::size_t j = 0; j < mus.size(); ++j)
        rhs += detail::action_coefficient(mus, ell, j, vac) * c_product_state(detail::without(mus, j), vac);
    return (lhs - rhs).cwiseAbs().maxCoeff() / std::max(lhs.cwiseAbs().maxCoeff(), 1e-300);
}

/// Residual of the linear system for X^j = C({m}) B({l}_j) with on-shell {m}:
/// sum_j coeff_j X^j = Lambda(l_ell|{m}) X^ell, relative to max |X^j coeff_j|.
inline double pairing_system_residual(const std::vector<Complex>& mus, const std::vector<Complex>& lams, std::size_t ell,
                                      const VacuumFunctions& vac)
{
    require(lams.size() == mus.size() + 1, "pairing_system_residual: need N+1 off-shell parameters");
    std::vector<Complex> X;
    for (std::size_t j = 0; j < lams.size(); ++j) X.push_back(c_pairing(mus, vac, b_product_state(detail::without(lams, j), vac)));
    Complex lhs{0.0};
    double scale = 0.0;
    for (std::size_t j = 0; j < lams.size(); ++j) {
        const Complex t = detail::action_coefficient(lams, ell, j, vac) * X[j];
        lhs += t;
        scale = std::max(scale, std::abs(t));
    }
    const Complex rhs = transfer_eigenvalue(lams[ell], mus, vac) * X[ell];
    return std::abs(lhs - rhs) / std::max({scale, std::abs(rhs), 1e-300});
}

/// e(l) = coth l - coth(l + eta).
inline Complex e_function(Complex l, Complex eta) { return 1.0 / std::tanh(l) - 1.0 / std::tanh(l + eta); }

/// K(l) = coth(l - eta) - coth(l + eta).
inline Complex k_function(Complex l, Complex eta) { return 1.0 / std::tanh(l - eta) - 1.0 / std::tanh(l + eta); }

/// frak-a(l|{m}) = d(l) Q(l + eta|{m}) / (a(l) Q(l - eta|{m})).
inline Complex frak_a(Complex l, const std::vector<Complex>& mus, const VacuumFunctions& vac)
{
    return vac.d(l) * q_function(l + vac.eta, mus) / (vac.a(l) * q_function(l - vac.eta, mus));
}

/// d/dl frak-a from its logarithmic derivative.
inline Complex frak_a_prime(Complex l, const std::vector<Complex>& mus, const VacuumFunctions& vac)
{
    Complex ld{0.0};
    for (Complex x : vac.xi) ld += 1.0 / std::tanh(l - x) - 1.0 / std::tanh(l - x + vac.eta);
    for (Complex m : mus) ld += 1.0 / std::tanh(l - m + vac.eta) - 1.0 / std::tanh(l - m - vac.eta);
    return frak_a(l, mus, vac) * ld;
}

/// Numerator variants. `as_printed` repeats e(m_j - l_k) in both terms; `exchanged`
/// uses e(l_k - m_j) in the second term, the form that agrees with direct pairing.
enum class SlavnovNumerator { exchanged, as_printed };

struct SlavnovReport {
    int L = 0;
    std::vector<Complex> mu, lambda;
    Complex slavnov{0.0};
    std::optional<Complex> bruteforce;
    double rel_err = 0.0;
};

/// Right side of the normalized Slavnov formula for
/// C({m}) B({l}) / C({m}) B({m}) with on-shell {m}.
inline Complex slavnov_ratio(const std::vector<Complex>& mus, const std::vector<Complex>& lams, const VacuumFunctions& vac,
                             SlavnovNumerator variant = SlavnovNumerator::exchanged)
{
    const std::size_t N = mus.size();
    require(N >= 1 && lams.size() == N, "slavnov_ratio: need |mu| = |lambda| >= 1");
    require(q_bae_residual(mus, vac) < 1e-10, "slavnov_ratio: mu is not on-shell");
    detail::check_distinct(mus, "slavnov_ratio");
    detail::check_distinct(lams, "slavnov_ratio");
    for (Complex m : mus)
        for (Complex l : lams)
            if (std::abs(m - l) < pole_guard) throw DomainError("slavnov_ratio: singular Cauchy determinant");
    const auto n = static_cast<Eigen::Index>(N);
    CMatrix num(n, n), gaudin(n, n), cauchy(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const Complex m = mus[static_cast<std::size_t>(j)], l = lams[static_cast<std::size_t>(k)];
            const Complex fa = frak_a(l, mus, vac);
            const Complex second = variant == SlavnovNumerator::exchanged ? e_function(l - m, vac.eta) : e_function(m - l, vac.eta);
            num(j, k) = e_function(m - l, vac.eta) / (1.0 + fa) - second / (1.0 + 1.0 / fa);
            const Complex mk = mus[static_cast<std::size_t>(k)];
            gaudin(j, k) = (j == k ? 1.0 : 0.0) - k_function(m - mk, vac.eta) / frak_a_prime(mk, mus, vac);
            cauchy(j, k) = 1.0 / std::sinh(m - l);
        }
    Complex log_ratio = detail::log_det(num) - detail::log_det(gaudin) - detail::log_det(cauchy);
    for (std::size_t j = 0; j < N; ++j)
        log_ratio += std::log(transfer_eigenvalue(lams[j], mus, vac)) - std::log(transfer_eigenvalue(mus[j], mus, vac));
    return std::exp(log_ratio);
}

/// C({m}) B({l}) / C({m}) B({m}) by explicit vectors.
inline Complex pairing_ratio_bruteforce(const std::vector<Complex>& mus, const std::vector<Complex>& lams,
                                        const VacuumFunctions& vac)
{
    const Complex den = c_pairing(mus, vac, b_product_state(mus, vac));
    require(std::abs(den) > 0.0, "pairing_ratio_bruteforce: vanishing on-shell norm");
    return c_pairing(mus, vac, b_product_state(lams, vac)) / den;
}

inline SlavnovReport slavnov_report(const std::vector<Complex>& mus, const std::vector<Complex>& lams, const VacuumFunctions& vac,
                                    bool with_bruteforce = true, SlavnovNumerator variant = SlavnovNumerator::exchanged)
{
    SlavnovReport r;
    r.L = vac.L;
    r.mu = mus;
    r.lambda = lams;
    r.slavnov = slavnov_ratio(mus, lams, vac, variant);
    if (with_bruteforce) {
        r.bruteforce = pairing_ratio_bruteforce(mus, lams, vac);
        r.rel_err = std::abs(r.slavnov - *r.bruteforce) / std::max(std::abs(*r.bruteforce), 1e-300);
    }
    return r;
}

} // namespace bethe
