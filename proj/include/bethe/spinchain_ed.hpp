#pragma once

// Exact diagonalization of periodic spin-1/2 chains.
//
// Conventions shared by every module of the library:
//   * site j (1-based) is bit j-1 of a configuration word,
//   * a set bit is a down spin (e_-), a cleared bit an up spin (e_+),
//   * full-space vectors are indexed by the configuration word itself,
//   * sector vectors are indexed by the ordinal of the word in SectorBasis.

#include <algorithm>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"

namespace bethe {

/// Fixed-N block of the S^z eigenbasis: every L-bit word with N set bits.
class SectorBasis {
public:
    SectorBasis(int L, int N) : L_(L), N_(N)
    {
        require(L >= 0 && L <= 24, "SectorBasis: chain length must satisfy 0 <= L <= 24");
        require(N >= 0 && N <= L, "SectorBasis: down-spin count out of range");
        states_.reserve(binomial(L, N));
        if (N == 0) {
            states_.push_back(0);
            return;
        }
        // Gosper's hack enumerates N-bit words in increasing order.
        std::uint64_t s = (std::uint64_t{1} << N) - 1;
        const std::uint64_t limit = std::uint64_t{1} << L;
        while (s < limit) {
            states_.push_back(s);
            const std::uint64_t c = s & (~s + 1);
            const std::uint64_t r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }

    int length() const { return L_; }
    int down_spins() const { return N_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<std::uint64_t>& states() const { return states_; }
    std::uint64_t state(std::size_t i) const { return states_[i]; }

    /// Ordinal of `config`, or nullopt when it is not in this sector.
    std::optional<std::size_t> find(std::uint64_t config) const
    {
        auto it = std::lower_bound(states_.begin(), states_.end(), config);
        if (it == states_.end() || *it != config) return std::nullopt;
        return static_cast<std::size_t>(it - states_.begin());
    }

    std::size_t index(std::uint64_t config) const
    {
        auto i = find(config);
        require(i.has_value(), "SectorBasis: configuration not in sector");
        return *i;
    }

    /// Down-spin positions 1 <= x_1 < ... < x_N <= L of the i-th state.
    std::vector<int> positions(std::size_t i) const
    {
        std::vector<int> x;
        const std::uint64_t s = states_[i];
        for (int j = 0; j < L_; ++j)
            if ((s >> j) & 1U) x.push_back(j + 1);
        return x;
    }

    static std::uint64_t config_of(const std::vector<int>& positions)
    {
        std::uint64_t s = 0;
        for (int x : positions) s |= std::uint64_t{1} << (x - 1);
        return s;
    }

private:
    int L_;
    int N_;
    std::vector<std::uint64_t> states_;
};

/// Complex operator on a sector block or on the full 2^L space (basis == nullptr).
struct OperatorMatrix {
    int L = 0;
    std::shared_ptr<const SectorBasis> basis; // null: full space
    SparseMatrix entries;
    bool hermitian = false;

    Eigen::Index dim() const { return entries.rows(); }
    bool full_space() const { return basis == nullptr; }
    CMatrix dense() const { return CMatrix(entries); }
    CVector apply(const CVector& v) const { return entries * v; }

    double hermiticity_defect() const
    {
        SparseMatrix d = entries - SparseMatrix(entries.adjoint());
        double m = 0.0;
        for (int k = 0; k < d.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }
};

struct Spectrum {
    RVector eigenvalues;                 // ascending
    std::optional<CMatrix> eigenvectors; // columns
};

namespace detail {

inline std::uint64_t space_size(int L) { return std::uint64_t{1} << L; }

/// Assemble an operator by visiting every basis word and emitting
/// (target word, amplitude) pairs through `emit`.
template <typename Kernel>
OperatorMatrix assemble(int L, std::shared_ptr<const SectorBasis> basis, Kernel&& kernel)
{
    OperatorMatrix op;
    op.L = L;
    op.basis = basis;
    const std::size_t dim = basis ? basis->size() : space_size(L);
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::size_t col = 0; col < dim; ++col) {
        const std::uint64_t s = basis ? basis->state(col) : col;
        kernel(s, [&](std::uint64_t t, Complex amp) {
            if (amp == Complex{0.0, 0.0}) return;
            const std::size_t row = basis ? basis->index(t) : static_cast<std::size_t>(t);
            trip.emplace_back(static_cast<int>(row), static_cast<int>(col), amp);
        });
    }
    op.entries.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    op.entries.setFromTriplets(trip.begin(), trip.end());
    op.entries.prune(Complex{0.0, 0.0});
    return op;
}

/// J * sum_j [ (s^x s^x + s^y s^y)_{j,j+1} + delta (s^z s^z - 1/4)_{j,j+1} ], periodic.
/// For L = 2 the bond (1,2) is counted twice, once as j = 1 and once as j = 2.
inline OperatorMatrix heisenberg(int L, double J, double delta, std::shared_ptr<const SectorBasis> basis)
{
    require(L >= 2, "Hamiltonian: chain length must be at least 2");
    auto op = assemble(L, std::move(basis), [&](std::uint64_t s, auto&& emit) {
        double diag = 0.0;
        for (int j = 0; j < L; ++j) {
            const int k = (j + 1) % L;
            const bool bj = (s >> j) & 1U, bk = (s >> k) & 1U;
            diag += J * delta * ((bj == bk ? 0.25 : -0.25) - 0.25);
            if (bj != bk) emit(s ^ (std::uint64_t{1} << j) ^ (std::uint64_t{1} << k), Complex{0.5 * J, 0.0});
        }
        emit(s, Complex{diag, 0.0});
    });
    op.hermitian = true;
    return op;
}

inline std::uint64_t cyclic_shift(std::uint64_t s, int L)
{
    const std::uint64_t top = (s >> (L - 1)) & 1U;
    const std::uint64_t mask = space_size(L) - 1;
    return ((s << 1) & mask) | top;
}

} // namespace detail

inline std::shared_ptr<const SectorBasis> build_sector_basis(int L, int N)
{
    return std::make_shared<const SectorBasis>(L, N);
}

/// H_L = J sum_j (s_j . s_{j+1} - 1/4) on the full space.
inline OperatorMatrix build_xxx_hamiltonian(int L, double J)
{
    return detail::heisenberg(L, J, 1.0, nullptr);
}

inline OperatorMatrix build_xxx_hamiltonian(int L, double J, std::shared_ptr<const SectorBasis> sector)
{
    require(sector && sector->length() == L, "Hamiltonian: sector length mismatch");
    return detail::heisenberg(L, J, 1.0, std::move(sector));
}

/// H_XXZ = sum_j (s^x s^x + s^y s^y + delta (s^z s^z - 1/4)).
inline OperatorMatrix build_xxz_hamiltonian(int L, double delta)
{
    return detail::heisenberg(L, 1.0, delta, nullptr);
}

inline OperatorMatrix build_xxz_hamiltonian(int L, double delta, std::shared_ptr<const SectorBasis> sector)
{
    require(sector && sector->length() == L, "Hamiltonian: sector length mismatch");
    return detail::heisenberg(L, 1.0, delta, std::move(sector));
}

/// U = P_{12} P_{23} ... P_{L-1,L}: moves the spin on site j to site j+1 (L to 1).
inline OperatorMatrix build_shift_operator(int L, std::shared_ptr<const SectorBasis> sector = nullptr)
{
    require(L >= 2, "shift operator: chain length must be at least 2");
    require(!sector || sector->length() == L, "shift operator: sector length mismatch");
    return detail::assemble(L, std::move(sector), [&](std::uint64_t s, auto&& emit) {
        emit(detail::cyclic_shift(s, L), Complex{1.0, 0.0});
    });
}

enum class SpinComponent { x, y, z, raise, lower, casimir };

inline SpinComponent parse_spin_component(const std::string& s)
{
    if (s == "x") return SpinComponent::x;
    if (s == "y") return SpinComponent::y;
    if (s == "z") return SpinComponent::z;
    if (s == "raise" || s == "+") return SpinComponent::raise;
    if (s == "lower" || s == "-") return SpinComponent::lower;
    if (s == "casimir") return SpinComponent::casimir;
    throw DomainError("unknown spin component '" + s + "'");
}

/// Total spin S^alpha = sum_j s_j^alpha on the full space; `casimir` is
/// (S^x)^2 + (S^y)^2 + (S^z)^2.
inline OperatorMatrix build_total_spin(int L, SpinComponent alpha)
{
    require(L >= 1 && L <= 24, "total spin: chain length out of range");
    auto emit_flips = [L](std::uint64_t s, auto&& emit, Complex up_amp, Complex down_amp) {
        // up_amp multiplies s^+ (clears a bit), down_amp multiplies s^- (sets a bit)
        for (int j = 0; j < L; ++j) {
            const std::uint64_t b = std::uint64_t{1} << j;
            if (s & b)
                emit(s ^ b, up_amp);
            else
                emit(s ^ b, down_amp);
        }
    };
    auto sz = [L](std::uint64_t s) { return 0.5 * (L - 2 * popcount(s)); };

    OperatorMatrix op;
    switch (alpha) {
    case SpinComponent::x:
        op = detail::assemble(L, nullptr, [&](std::uint64_t s, auto&& emit) { emit_flips(s, emit, 0.5, 0.5); });
        op.hermitian = true;
        break;
    case SpinComponent::y:
        // s^y = (s^+ - s^-) / (2i)
        op = detail::assemble(L, nullptr,
                              [&](std::uint64_t s, auto&& emit) { emit_flips(s, emit, -0.5 * I, 0.5 * I); });
        op.hermitian = true;
        break;
    case SpinComponent::z:
        op = detail::assemble(L, nullptr, [&](std::uint64_t s, auto&& emit) { emit(s, sz(s)); });
        op.hermitian = true;
        break;
    case SpinComponent::raise:
        op = detail::assemble(L, nullptr, [&](std::uint64_t s, auto&& emit) { emit_flips(s, emit, 1.0, 0.0); });
        break;
    case SpinComponent::lower:
        op = detail::assemble(L, nullptr, [&](std::uint64_t s, auto&& emit) { emit_flips(s, emit, 0.0, 1.0); });
        break;
    case SpinComponent::casimir: {
        // S^2 = S^- S^+ + S^z (S^z + 1)
        auto sp = build_total_spin(L, SpinComponent::raise).entries;
        auto sm = build_total_spin(L, SpinComponent::lower).entries;
        auto z = build_total_spin(L, SpinComponent::z).entries;
        SparseMatrix id(z.rows(), z.cols());
        id.setIdentity();
        op.L = L;
        op.entries = SparseMatrix(sm * sp) + SparseMatrix(z * (z + id));
        op.entries.prune(Complex{0.0, 0.0});
        op.hermitian = true;
        break;
    }
    }
    return op;
}

/// Casimir restricted to a fixed-N sector (it conserves S^z).
inline OperatorMatrix build_casimir(std::shared_ptr<const SectorBasis> sector)
{
    const int L = sector->length();
    const double m = 0.5 * (L - 2 * sector->down_spins());
    auto op = detail::assemble(L, sector, [&](std::uint64_t s, auto&& emit) {
        // S^- S^+ : clear bit i then set bit j
        double diag = m * (m + 1.0);
        for (int i = 0; i < L; ++i) {
            const std::uint64_t bi = std::uint64_t{1} << i;
            if (!(s & bi)) continue;
            const std::uint64_t t = s ^ bi;
            for (int j = 0; j < L; ++j) {
                const std::uint64_t bj = std::uint64_t{1} << j;
                if (t & bj) continue;
                if ((t | bj) == s)
                    diag += 1.0;
                else
                    emit(t | bj, Complex{1.0, 0.0});
            }
        }
        emit(s, Complex{diag, 0.0});
    });
    op.hermitian = true;
    return op;
}

/// S^+ applied to a vector over SectorBasis(L, N); the result lives on SectorBasis(L, N-1).
inline CVector raise_in_sector(const CVector& v, const SectorBasis& from, const SectorBasis& to)
{
    require(to.length() == from.length() && to.down_spins() + 1 == from.down_spins(), "raise: sector mismatch");
    require(static_cast<std::size_t>(v.size()) == from.size(), "raise: vector size mismatch");
    CVector out = CVector::Zero(static_cast<Eigen::Index>(to.size()));
    for (std::size_t i = 0; i < from.size(); ++i) {
        const std::uint64_t s = from.state(i);
        for (int j = 0; j < from.length(); ++j) {
            const std::uint64_t b = std::uint64_t{1} << j;
            if (s & b) out[static_cast<Eigen::Index>(to.index(s ^ b))] += v[static_cast<Eigen::Index>(i)];
        }
    }
    return out;
}

/// S^- applied to a vector over SectorBasis(L, N); the result lives on SectorBasis(L, N+1).
inline CVector lower_in_sector(const CVector& v, const SectorBasis& from, const SectorBasis& to)
{
    require(to.length() == from.length() && to.down_spins() == from.down_spins() + 1, "lower: sector mismatch");
    require(static_cast<std::size_t>(v.size()) == from.size(), "lower: vector size mismatch");
    CVector out = CVector::Zero(static_cast<Eigen::Index>(to.size()));
    for (std::size_t i = 0; i < from.size(); ++i) {
        const std::uint64_t s = from.state(i);
        for (int j = 0; j < from.length(); ++j) {
            const std::uint64_t b = std::uint64_t{1} << j;
            if (!(s & b)) out[static_cast<Eigen::Index>(to.index(s | b))] += v[static_cast<Eigen::Index>(i)];
        }
    }
    return out;
}

/// Embed a sector vector into the full 2^L space.
inline CVector embed(const CVector& v, const SectorBasis& sector)
{
    CVector out = CVector::Zero(static_cast<Eigen::Index>(detail::space_size(sector.length())));
    for (std::size_t i = 0; i < sector.size(); ++i)
        out[static_cast<Eigen::Index>(sector.state(i))] = v[static_cast<Eigen::Index>(i)];
    return out;
}

/// Max-entry magnitude of AB - BA.
inline double commutator_norm(const OperatorMatrix& A, const OperatorMatrix& B)
{
    if (A.dim() != B.dim()) throw std::invalid_argument("commutator_norm: dimension mismatch");
    SparseMatrix c = SparseMatrix(A.entries * B.entries) - SparseMatrix(B.entries * A.entries);
    double m = 0.0;
    for (int k = 0; k < c.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(c, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

struct DiagonalizeOptions {
    int count = -1;                  // number of lowest eigenpairs; -1 for all
    bool vectors = true;
    Eigen::Index dense_limit = 4096; // dense solver up to this dimension
    double hermitian_tolerance = 1e-12;
    unsigned seed = 12345;
};

namespace detail {

/// Lowest `count` eigenpairs of a Hermitian sparse matrix by repeated Lanczos
/// runs with full reorthogonalization; each converged Ritz vector is locked and
/// the next run works in its orthogonal complement, so degenerate levels are
/// resolved with their multiplicities.
inline Spectrum lanczos_lowest(const SparseMatrix& H, int count, unsigned seed)
{
    const Eigen::Index n = H.rows();
    require(count > 0 && count <= n, "lanczos: eigenpair count out of range");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;

    double hnorm = 0.0;
    for (int k = 0; k < H.outerSize(); ++k) {
        double col = 0.0;
        for (SparseMatrix::InnerIterator it(H, k); it; ++it) col += std::abs(it.value());
        hnorm = std::max(hnorm, col);
    }
    const double tol = 1e-10 * std::max(hnorm, 1.0);

    CMatrix locked(n, 0);
    std::vector<double> values;
    auto project_out = [&](CVector& v) {
        for (int pass = 0; pass < 2; ++pass)
            if (locked.cols() > 0) v -= locked * (locked.adjoint() * v);
    };

    // One restarted Lanczos run in the complement of `locked`. Locks the leading
    // run of converged Ritz pairs and returns the lowest one found, or nullopt
    // when the complement is exhausted.
    auto run = [&](int want) -> std::optional<double> {
        const Eigen::Index m = std::min<Eigen::Index>(n - locked.cols(), 120);
        if (m <= 0) return std::nullopt;
        CVector start(n);
        for (Eigen::Index i = 0; i < n; ++i) start[i] = Complex(gauss(rng), gauss(rng));
        for (int restart = 0; restart < 400; ++restart) {
            project_out(start);
            start.normalize();
            CMatrix V(n, m), HV(n, m);
            V.col(0) = start;
            Eigen::Index k = 0;
            for (; k < m; ++k) {
                HV.col(k) = H * V.col(k);
                CVector w = HV.col(k);
                // interleave both projections: residue along locked vectors would
                // otherwise be amplified by the iteration
                for (int pass = 0; pass < 3; ++pass) {
                    project_out(w);
                    w -= V.leftCols(k + 1) * (V.leftCols(k + 1).adjoint() * w);
                }
                const double beta = w.norm();
                if (k + 1 == m || beta < 1e-10 * std::max(hnorm, 1.0)) {
                    ++k;
                    break;
                }
                V.col(k + 1) = w / beta;
            }
            // Rayleigh-Ritz with the explicitly projected matrix: stays exact
            // even when the three-term recurrence degrades near breakdown.
            CMatrix T = V.leftCols(k).adjoint() * HV.leftCols(k);
            Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (T + T.adjoint()));
            CVector lowest;
            std::optional<double> first;
            for (Eigen::Index j = 0; j < k && j < want; ++j) {
                CVector ritz = V.leftCols(k) * es.eigenvectors().col(j);
                project_out(ritz);
                ritz.normalize();
                const double theta = es.eigenvalues()[j];
                if (j == 0) lowest = ritz;
                if ((H * ritz - theta * ritz).norm() >= tol) break;
                locked.conservativeResize(n, locked.cols() + 1);
                locked.col(locked.cols() - 1) = ritz;
                values.push_back(theta);
                if (!first) first = theta;
            }
            if (first) return first;
            start = lowest;
        }
        throw DomainError("lanczos: no convergence");
    };

    while (static_cast<int>(values.size()) < count) {
        if (!run(count - static_cast<int>(values.size()))) break;
    }
    require(static_cast<int>(values.size()) >= count, "lanczos: Krylov space exhausted");
    // A single Krylov space holds one copy of each degenerate level, so keep
    // searching the complement until nothing lies below the current cut.
    for (int sweep = 0; sweep < 4 * count + 8; ++sweep) {
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const double cut = sorted[static_cast<std::size_t>(count - 1)];
        auto low = run(1);
        if (!low || *low > cut + 1e-9 * std::max(hnorm, 1.0)) break;
    }

    // Rayleigh-Ritz on the locked space fixes ordering and mixes degenerate copies.
    CMatrix proj = locked.adjoint() * (H * locked);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (proj + proj.adjoint()));
    Spectrum sp;
    sp.eigenvalues = es.eigenvalues().head(count);
    sp.eigenvectors = locked * es.eigenvectors().leftCols(count);
    return sp;
}

} // namespace detail

/// Eigenvalues in ascending order (and optionally eigenvectors) of a Hermitian operator.
inline Spectrum diagonalize(const OperatorMatrix& M, const DiagonalizeOptions& opt = {})
{
    require(M.hermiticity_defect() < opt.hermitian_tolerance, "diagonalize: operator is not Hermitian");
    const Eigen::Index n = M.dim();
    const int count = opt.count < 0 ? static_cast<int>(n) : std::min<int>(opt.count, static_cast<int>(n));
    Spectrum sp;
    if (n <= opt.dense_limit) {
        CMatrix d = M.dense();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(d, opt.vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        require(es.info() == Eigen::Success, "diagonalize: eigensolver failed");
        sp.eigenvalues = es.eigenvalues().head(count);
        if (opt.vectors) sp.eigenvectors = es.eigenvectors().leftCols(count);
        return sp;
    }
    require(opt.count > 0, "diagonalize: sparse operators require an explicit eigenpair count");
    sp = detail::lanczos_lowest(M.entries, count, opt.seed);
    if (!opt.vectors) sp.eigenvectors.reset();
    return sp;
}

/// Group sorted eigenvalues into levels; values closer than `tol` are one level.
inline std::vector<std::pair<double, int>> degenerate_levels(const RVector& sorted, double tol = 1e-9)
{
    std::vector<std::pair<double, int>> levels;
    for (Eigen::Index i = 0; i < sorted.size(); ++i) {
        if (!levels.empty() && std::abs(sorted[i] - levels.back().first) < tol)
            ++levels.back().second;
        else
            levels.emplace_back(sorted[i], 1);
    }
    return levels;
}

} // namespace bethe
