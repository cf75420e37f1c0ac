#pragma once

// Six-vertex model: R-matrix, Yang-Baxter and RTT checks, matrix-free
// monodromy and transfer matrices, partition functions, the link to the XXZ
// Hamiltonian and the square-ice entropy.
//
// The auxiliary space is an extra qubit at bit L of the combined word (the
// slowest factor). R acts on (aux, site) pairs with local index 0 = +, 1 = -:
//   R = [[a,0,0,0],[0,b,c,0],[0,c,b,0],[0,0,0,a]]   in the basis ++, +-, -+, --.
// R is symmetric under exchange of its two factors, so the order of the pair
// does not matter when it is applied to two bits.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "core.hpp"
#include "spinchain_ed.hpp"

namespace bethe {

template <typename S>
using Weights3 = std::array<S, 3>; // (a, b, c)

/// Boltzmann weights, either direct or from a = rho sh(l + eta), b = rho sh(l), c = rho sh(eta),
/// optionally with inhomogeneities xi_j entering as l - xi_j on site j.
struct VertexWeights {
    Complex a{1.0}, b{1.0}, c{1.0};
    std::optional<Complex> rho, lambda, eta;
    std::vector<Complex> xi;

    static VertexWeights direct(Complex a, Complex b, Complex c)
    {
        VertexWeights w;
        w.a = a;
        w.b = b;
        w.c = c;
        return w;
    }

    static VertexWeights parameterized(Complex rho, Complex lambda, Complex eta, std::vector<Complex> xi = {})
    {
        VertexWeights w;
        w.rho = rho;
        w.lambda = lambda;
        w.eta = eta;
        w.xi = std::move(xi);
        w.a = rho * std::sinh(lambda + eta);
        w.b = rho * std::sinh(lambda);
        w.c = rho * std::sinh(eta);
        return w;
    }

    bool is_parameterized() const { return rho && lambda && eta; }

    /// |stored - reconstructed| for parameterized weights, 0 otherwise.
    double reconstruction_defect() const
    {
        if (!is_parameterized()) return 0.0;
        return std::max({std::abs(a - *rho * std::sinh(*lambda + *eta)), std::abs(b - *rho * std::sinh(*lambda)),
                         std::abs(c - *rho * std::sinh(*eta))});
    }

    /// Weights excluded from the hyperbolic parameterization (a +- b = +-c) or with c = 0.
    bool degenerate(double tol = 1e-12) const
    {
        const double s = std::max({std::abs(a), std::abs(b), std::abs(c), 1.0});
        return std::abs(c) < tol * s || std::abs(a + b - c) < tol * s || std::abs(a + b + c) < tol * s ||
               std::abs(a - b - c) < tol * s || std::abs(a - b + c) < tol * s;
    }

    /// Weights of R_{0j}(spectral - xi_j) for site j (1-based). Direct weights ignore both arguments.
    Weights3<Complex> at(Complex spectral, int site) const
    {
        if (!is_parameterized()) return {a, b, c};
        const Complex x = xi.empty() ? Complex{0.0} : xi.at(static_cast<std::size_t>(site - 1));
        const Complex l = spectral - x;
        return {*rho * std::sinh(l + *eta), *rho * std::sinh(l), *rho * std::sinh(*eta)};
    }

    /// Weights for L sites at a spectral parameter (defaults to the stored lambda).
    std::vector<Weights3<Complex>> chain(int L, std::optional<Complex> spectral = std::nullopt) const
    {
        require(xi.empty() || static_cast<int>(xi.size()) == L, "VertexWeights: need one inhomogeneity per site");
        const Complex l = spectral ? *spectral : lambda.value_or(Complex{0.0});
        std::vector<Weights3<Complex>> w;
        for (int j = 1; j <= L; ++j) w.push_back(at(l, j));
        return w;
    }
};

inline CMatrix r_matrix_from_weights(Complex a, Complex b, Complex c)
{
    CMatrix R = CMatrix::Zero(4, 4);
    R(0, 0) = R(3, 3) = a;
    R(1, 1) = R(2, 2) = b;
    R(1, 2) = R(2, 1) = c;
    return R;
}

/// R(l) with a = rho sh(l + eta), b = rho sh(l), c = rho sh(eta).
inline CMatrix r_matrix(Complex lambda, Complex eta, Complex rho = 1.0)
{
    return r_matrix_from_weights(rho * std::sinh(lambda + eta), rho * std::sinh(lambda), rho * std::sinh(eta));
}

namespace detail {

/// R on factors (p, q) of three qubits (factor 1 slowest), from a 4x4 matrix.
inline CMatrix embed_r3(const CMatrix& R, int p, int q)
{
    CMatrix out = CMatrix::Zero(8, 8);
    auto bit = [](int idx, int f) { return (idx >> (3 - f)) & 1; };
    for (int r = 0; r < 8; ++r)
        for (int s = 0; s < 8; ++s) {
            const int other = 6 - p - q; // the untouched factor
            if (bit(r, other) != bit(s, other)) continue;
            out(r, s) = R(2 * bit(r, p) + bit(r, q), 2 * bit(s, p) + bit(s, q));
        }
    return out;
}

} // namespace detail

/// max |R12(l-m) R13(l-n) R23(m-n) - R23(m-n) R13(l-n) R12(l-m)| for an arbitrary R(.)
inline double ybe_residual(const std::function<CMatrix(Complex)>& R, Complex lambda, Complex mu, Complex nu)
{
    const CMatrix R12 = detail::embed_r3(R(lambda - mu), 1, 2);
    const CMatrix R13 = detail::embed_r3(R(lambda - nu), 1, 3);
    const CMatrix R23 = detail::embed_r3(R(mu - nu), 2, 3);
    return max_abs(R12 * R13 * R23 - R23 * R13 * R12);
}

inline double ybe_residual(Complex lambda, Complex mu, Complex nu, Complex eta, Complex rho = 1.0)
{
    return ybe_residual([&](Complex l) { return r_matrix(l, eta, rho); }, lambda, mu, nu);
}

namespace detail {

/// Apply R with weights w to bits p and q of every word in a full 2^n space.
template <typename S, typename Vec>
void apply_r_bits(int p, int q, const Weights3<S>& w, const Vec& in, Vec& out)
{
    const std::uint64_t mp = std::uint64_t{1} << p, mq = std::uint64_t{1} << q;
    out.setZero();
    for (Eigen::Index s = 0; s < in.size(); ++s) {
        const S x = in[s];
        if (x == S(0)) continue;
        const auto u = static_cast<std::uint64_t>(s);
        if (((u & mp) != 0) == ((u & mq) != 0)) {
            out[s] += w[0] * x;
        } else {
            out[s] += w[1] * x;
            out[static_cast<Eigen::Index>(u ^ mp ^ mq)] += w[2] * x;
        }
    }
}

/// Words of L+1 qubits (aux at bit L) with a fixed number of down spins, and
/// for each site the index of the word with aux and site bits exchanged.
struct CombinedSector {
    SectorBasis basis;
    std::vector<std::vector<std::uint32_t>> swapped; // [site-1][index]

    CombinedSector(int L, int K) : basis(L + 1, K)
    {
        const std::uint64_t aux = std::uint64_t{1} << L;
        swapped.assign(static_cast<std::size_t>(L), std::vector<std::uint32_t>(basis.size()));
        for (int j = 0; j < L; ++j) {
            const std::uint64_t m = std::uint64_t{1} << j;
            for (std::size_t i = 0; i < basis.size(); ++i) {
                const std::uint64_t s = basis.state(i);
                swapped[static_cast<std::size_t>(j)][i] =
                    ((s & aux) != 0) == ((s & m) != 0) ? static_cast<std::uint32_t>(i)
                                                       : static_cast<std::uint32_t>(basis.index(s ^ aux ^ m));
            }
        }
    }
};

/// T = R_{0L} ... R_{01} applied in place to a vector over a combined sector.
template <typename S>
void apply_chain(const CombinedSector& cs, const std::vector<Weights3<S>>& w, Eigen::Matrix<S, Eigen::Dynamic, 1>& v,
                 Eigen::Matrix<S, Eigen::Dynamic, 1>& scratch)
{
    const int L = static_cast<int>(w.size());
    const std::uint64_t aux = std::uint64_t{1} << L;
    scratch.resize(v.size());
    for (int j = 0; j < L; ++j) {
        const std::uint64_t m = std::uint64_t{1} << j;
        const auto& sw = cs.swapped[static_cast<std::size_t>(j)];
        const auto& wj = w[static_cast<std::size_t>(j)];
        scratch.setZero();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const S x = v[i];
            if (x == S(0)) continue;
            const std::uint64_t s = cs.basis.state(static_cast<std::size_t>(i));
            if (((s & aux) != 0) == ((s & m) != 0)) {
                scratch[i] += wj[0] * x;
            } else {
                scratch[i] += wj[1] * x;
                scratch[static_cast<Eigen::Index>(sw[static_cast<std::size_t>(i)])] += wj[2] * x;
            }
        }
        v.swap(scratch);
    }
}

} // namespace detail

/// Transfer matrix restricted to the chain sector with N down spins, applied
/// matrix-free: t v = <+|T|+> v + <-|T|-> v.
template <typename S>
class TransferOperator {
public:
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

    TransferOperator(int L, int N, std::vector<Weights3<S>> weights)
        : L_(L), chain_(L, N), w_(std::move(weights)), up_(L, N), down_(L, N + 1)
    {
        require(L >= 1 && L <= 14, "transfer: need 1 <= L <= 14");
        require(static_cast<int>(w_.size()) == L, "transfer: need one weight triple per site");
        const std::uint64_t aux = std::uint64_t{1} << L;
        up_index_.resize(chain_.size());
        down_index_.resize(chain_.size());
        for (std::size_t i = 0; i < chain_.size(); ++i) {
            up_index_[i] = static_cast<std::uint32_t>(up_.basis.index(chain_.state(i)));
            down_index_[i] = static_cast<std::uint32_t>(down_.basis.index(chain_.state(i) | aux));
        }
    }

    std::size_t dim() const { return chain_.size(); }
    const SectorBasis& basis() const { return chain_; }

    Vec apply(const Vec& v) const
    {
        Vec out = Vec::Zero(v.size());
        Vec work, scratch;
        // aux = + component
        work = Vec::Zero(static_cast<Eigen::Index>(up_.basis.size()));
        for (std::size_t i = 0; i < chain_.size(); ++i) work[up_index_[i]] = v[static_cast<Eigen::Index>(i)];
        detail::apply_chain(up_, w_, work, scratch);
        for (std::size_t i = 0; i < chain_.size(); ++i) out[static_cast<Eigen::Index>(i)] += work[up_index_[i]];
        // aux = - component
        work = Vec::Zero(static_cast<Eigen::Index>(down_.basis.size()));
        for (std::size_t i = 0; i < chain_.size(); ++i) work[down_index_[i]] = v[static_cast<Eigen::Index>(i)];
        detail::apply_chain(down_, w_, work, scratch);
        for (std::size_t i = 0; i < chain_.size(); ++i) out[static_cast<Eigen::Index>(i)] += work[down_index_[i]];
        return out;
    }

    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> dense() const
    {
        const auto n = static_cast<Eigen::Index>(dim());
        Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
        Vec e = Vec::Zero(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            e[k] = S(1);
            m.col(k) = apply(e);
            e[k] = S(0);
        }
        return m;
    }

private:
    int L_;
    SectorBasis chain_;
    std::vector<Weights3<S>> w_;
    detail::CombinedSector up_, down_;
    std::vector<std::uint32_t> up_index_, down_index_;
};

/// Transfer matrix t(l) = tr_0 T_0(l), stored as one dense block per S^z sector.
struct TransferMatrix {
    int L = 0;
    Complex lambda{0.0};
    std::vector<CMatrix> blocks; // blocks[N] acts on SectorBasis(L, N)

    CMatrix dense() const
    {
        const Eigen::Index d = Eigen::Index{1} << L;
        CMatrix m = CMatrix::Zero(d, d);
        for (int N = 0; N <= L; ++N) {
            SectorBasis b(L, N);
            const CMatrix& blk = blocks[static_cast<std::size_t>(N)];
            for (std::size_t i = 0; i < b.size(); ++i)
                for (std::size_t j = 0; j < b.size(); ++j)
                    m(static_cast<Eigen::Index>(b.state(i)), static_cast<Eigen::Index>(b.state(j))) =
                        blk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        return m;
    }
};

inline constexpr int max_dense_transfer_length = 12;

inline TransferMatrix transfer(Complex lambda, int L, const VertexWeights& weights)
{
    require(L >= 1 && L <= max_dense_transfer_length, "transfer: dense blocks need 1 <= L <= 12");
    TransferMatrix t;
    t.L = L;
    t.lambda = lambda;
    const auto w = weights.chain(L, lambda);
    for (int N = 0; N <= L; ++N) t.blocks.push_back(TransferOperator<Complex>(L, N, w).dense());
    return t;
}

/// Monodromy T_0(l) = R_{0L}(l - xi_L) ... R_{01}(l - xi_1) on the 2^{L+1} space
/// (aux at bit L), applied matrix-free.
class Monodromy {
public:
    Monodromy(Complex lambda, int L, const VertexWeights& weights) : L_(L), w_(weights.chain(L, lambda))
    {
        require(L >= 1 && L <= 14, "monodromy: need 1 <= L <= 14");
    }

    int length() const { return L_; }

    CVector apply(const CVector& v) const
    {
        require(v.size() == (Eigen::Index{1} << (L_ + 1)), "monodromy: vector size mismatch");
        CVector cur = v, next(v.size());
        for (int j = 0; j < L_; ++j) {
            detail::apply_r_bits(L_, j, w_[static_cast<std::size_t>(j)], cur, next);
            cur.swap(next);
        }
        return cur;
    }

    CMatrix dense() const
    {
        require(L_ <= 10, "monodromy: dense form limited to L <= 10");
        const Eigen::Index d = Eigen::Index{1} << (L_ + 1);
        CMatrix m(d, d);
        CVector e = CVector::Zero(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            e[k] = 1.0;
            m.col(k) = apply(e);
            e[k] = 0.0;
        }
        return m;
    }

    /// <alpha|T|beta> on the chain, alpha, beta in {0 (+), 1 (-)}.
    CMatrix block(int alpha, int beta) const
    {
        const Eigen::Index d = Eigen::Index{1} << L_;
        return dense().block(alpha * d, beta * d, d, d);
    }

    /// Apply the block <alpha|T|beta> to a chain vector.
    CVector apply_block(int alpha, int beta, const CVector& v) const
    {
        const Eigen::Index d = Eigen::Index{1} << L_;
        require(v.size() == d, "monodromy: chain vector size mismatch");
        CVector full = CVector::Zero(2 * d);
        full.segment(beta * d, d) = v;
        return apply(full).segment(alpha * d, d);
    }

private:
    int L_;
    std::vector<Weights3<Complex>> w_;
};

/// max entry of R_{00'}(l - m) T_0(l) T_0'(m) - T_0'(m) T_0(l) R_{00'}(l - m) on L+2 qubits
/// (aux 0 at bit L, aux 0' at bit L+1). Needs parameterized weights.
inline double rtt_residual(Complex lambda, Complex mu, int L, const VertexWeights& weights)
{
    require(weights.is_parameterized(), "rtt_residual: parameterized weights required");
    require(L >= 1 && L <= 8, "rtt_residual: need 1 <= L <= 8");
    const auto wl = weights.chain(L, lambda), wm = weights.chain(L, mu);
    const Weights3<Complex> r{*weights.rho * std::sinh(lambda - mu + *weights.eta), *weights.rho * std::sinh(lambda - mu),
                              *weights.rho * std::sinh(*weights.eta)};
    const Eigen::Index d = Eigen::Index{1} << (L + 2);
    auto T0 = [&](CVector v, const std::vector<Weights3<Complex>>& w, int aux) {
        CVector next(v.size());
        for (int j = 0; j < L; ++j) {
            detail::apply_r_bits(aux, j, w[static_cast<std::size_t>(j)], v, next);
            v.swap(next);
        }
        return v;
    };
    auto R00 = [&](const CVector& v) {
        CVector out(v.size());
        detail::apply_r_bits(L, L + 1, r, v, out);
        return out;
    };
    double worst = 0.0;
    CVector e = CVector::Zero(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        e[k] = 1.0;
        const CVector lhs = R00(T0(T0(e, wm, L + 1), wl, L));
        const CVector rhs = T0(T0(R00(e), wl, L), wm, L + 1);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        e[k] = 0.0;
    }
    return worst;
}

struct HamiltonianLink {
    OperatorMatrix hamiltonian; // reconstructed J [ (sh(eta)/2) t(0)^{-1} t'(0) - Delta L / 2 ]
    double deviation = 0.0;     // max entry deviation from J H_XXZ(Delta = ch eta)
};

/// Reconstruct the XXZ Hamiltonian from the logarithmic derivative of the
/// homogeneous transfer matrix at l = 0 (central differences with `step`).
inline HamiltonianLink hamiltonian_from_transfer(int L, Complex eta, Complex rho, double J, double step = 1e-5)
{
    require(L >= 3 && L <= 10, "hamiltonian_from_transfer: need 3 <= L <= 10");
    require(std::abs(std::sinh(eta)) > 1e-12, "hamiltonian_from_transfer: singular t(0) at sh(eta) = 0");
    const Complex delta_c = std::cosh(eta);
    require(std::abs(delta_c.imag()) < 1e-12, "hamiltonian_from_transfer: ch(eta) must be real");
    const double delta = delta_c.real();
    const auto w = VertexWeights::parameterized(rho, 0.0, eta);
    const CMatrix t0 = transfer(0.0, L, w).dense();
    const CMatrix tp = transfer(step, L, w).dense();
    const CMatrix tm = transfer(-step, L, w).dense();
    const CMatrix dt = (tp - tm) / (2.0 * step);
    Eigen::PartialPivLU<CMatrix> lu(t0);
    CMatrix log_derivative = lu.solve(dt);
    const Eigen::Index d = t0.rows();
    CMatrix H = J * (0.5 * std::sinh(eta) * log_derivative - 0.5 * delta * L * CMatrix::Identity(d, d));
    HamiltonianLink link;
    link.hamiltonian.L = L;
    link.hamiltonian.entries = H.sparseView();
    link.hamiltonian.hermitian = true;
    CMatrix ref = J * build_xxz_hamiltonian(L, delta).dense();
    link.deviation = max_abs(H - ref);
    return link;
}

/// Z_{L,M} = tr (t^M) = sum_N tr (t_N^M) for homogeneous weights (a, b, c).
/// With S = std::int64_t and unit weights this counts ice configurations exactly.
template <typename S>
S partition_function(int L, int M, S a, S b, S c)
{
    require(L >= 1 && L <= 12 && M >= 1, "partition_function: need 1 <= L <= 12, M >= 1");
    const std::vector<Weights3<S>> w(static_cast<std::size_t>(L), Weights3<S>{a, b, c});
    S z = S(0);
    for (int N = 0; N <= L; ++N) {
        const auto t = TransferOperator<S>(L, N, w).dense();
        Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> p = t;
        for (int m = 1; m < M; ++m) p = (p * t).eval();
        z += p.trace();
    }
    return z;
}

/// Reference: sum over every assignment of the 2 L M edges of the periodic
/// L x M lattice of the product of vertex weights <out|R|in>.
template <typename S>
S partition_function_bruteforce(int L, int M, S a, S b, S c)
{
    require(L * M <= 12, "partition_function_bruteforce: need L M <= 12");
    const int edges = 2 * L * M;
    auto h = [&](std::uint64_t cfg, int i, int m) { return static_cast<int>((cfg >> (m * L + (i % L))) & 1U); };
    auto v = [&](std::uint64_t cfg, int i, int m) { return static_cast<int>((cfg >> (L * M + (m % M) * L + i)) & 1U); };
    S z = S(0);
    for (std::uint64_t cfg = 0; cfg < (std::uint64_t{1} << edges); ++cfg) {
        S prod = S(1);
        for (int m = 0; m < M && prod != S(0); ++m)
            for (int i = 0; i < L; ++i) {
                const int hin = h(cfg, i, m), vin = v(cfg, i, m), hout = h(cfg, i + 1, m), vout = v(cfg, i, m + 1);
                S wgt = S(0);
                if (hin == vin && hout == hin && vout == vin) wgt = a;
                else if (hin != vin && hout == hin && vout == vin) wgt = b;
                else if (hin != vin && hout == vin && vout == hin) wgt = c;
                prod = prod * wgt;
                if (prod == S(0)) break;
            }
        z += prod;
    }
    return z;
}

struct IceEntropyRow {
    int L = 0;
    double log_lambda_over_L = 0.0;
    int iterations = 0;
};

struct IceEntropy {
    std::vector<IceEntropyRow> rows;
    double extrapolated = 0.0; // s_inf of the fit s(L) = s_inf + alpha/L + beta/L^2
    double alpha = 0.0, beta = 0.0;
};

/// Largest eigenvalue of the S^z = 0 transfer block at a = b = c = 1 by shifted
/// power iteration (the block is non-negative, so the Perron vector is positive).
inline std::pair<double, int> ice_leading_eigenvalue(int L, double tol = 1e-10, int max_iter = 100000)
{
    require(L >= 2 && L % 2 == 0 && L <= 14, "ice_entropy: need even 2 <= L <= 14");
    const std::vector<Weights3<double>> w(static_cast<std::size_t>(L), Weights3<double>{1.0, 1.0, 1.0});
    TransferOperator<double> t(L, L / 2, w);
    RVector v = RVector::Ones(static_cast<Eigen::Index>(t.dim()));
    v.normalize();
    double lambda = 0.0;
    const double shift = 1.0; // separates the Perron root from a possible -Lambda_0
    for (int it = 1; it <= max_iter; ++it) {
        RVector tv = t.apply(v);
        const double next = v.dot(tv);
        RVector u = tv + shift * v;
        u.normalize();
        const double resid = (tv - next * v).norm();
        v = u;
        if (std::abs(next - lambda) < tol * std::abs(next) && resid < 1e-8 * std::abs(next)) return {next, it};
        lambda = next;
    }
    throw DomainError("ice_entropy: power iteration did not converge");
}

inline IceEntropy ice_entropy(int L_max, int L_min = 2)
{
    require(L_max >= 4 && L_max <= 14, "ice_entropy: need 4 <= L_max <= 14");
    IceEntropy out;
    for (int L = std::max(2, L_min + (L_min % 2)); L <= L_max; L += 2) {
        auto [lam, it] = ice_leading_eigenvalue(L);
        out.rows.push_back({L, std::log(lam) / L, it});
    }
    require(out.rows.size() >= 3, "ice_entropy: need at least three chain lengths for the fit");
    RMatrix A(static_cast<Eigen::Index>(out.rows.size()), 3);
    RVector y(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double L = out.rows[static_cast<std::size_t>(i)].L;
        A(i, 0) = 1.0;
        A(i, 1) = 1.0 / L;
        A(i, 2) = 1.0 / (L * L);
        y[i] = out.rows[static_cast<std::size_t>(i)].log_lambda_over_L;
    }
    RVector fit = A.colPivHouseholderQr().solve(y);
    out.extrapolated = fit[0];
    out.alpha = fit[1];
    out.beta = fit[2];
    return out;
}

/// Lieb's square-ice entropy (3/2) ln(4/3).
inline double lieb_ice_entropy() { return 1.5 * std::log(4.0 / 3.0); }

} // namespace bethe
