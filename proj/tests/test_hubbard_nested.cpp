#include <bethe/hubbard_nested.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"

using namespace bethe;

namespace {

// Fock space of 2L modes by Jordan-Wigner: c_o = (prod_{o' > o} Z_{o'}) sigma^+_o,
// mode o stored as bit o (oracle site o + 1).
CMatrix jw_annihilator(int modes, int o)
{
    CMatrix m = oracle::site_op(modes, o + 1, oracle::pauli('+'));
    for (int p = o + 1; p < modes; ++p) m = oracle::site_op(modes, p + 1, 2.0 * oracle::pauli('z')) * m;
    return m;
}

CMatrix jw_hubbard(int L, double u)
{
    const int modes = 2 * L;
    const Eigen::Index d = Eigen::Index{1} << modes;
    std::vector<CMatrix> c;
    for (int o = 0; o < modes; ++o) c.push_back(jw_annihilator(modes, o));
    CMatrix H = CMatrix::Zero(d, d);
    const CMatrix Id = CMatrix::Identity(d, d);
    for (int j = 0; j < L; ++j) {
        const int k = (j + 1) % L;
        if (L > 1)
            for (int a = 0; a < 2; ++a) {
                const CMatrix& cj = c[static_cast<std::size_t>(2 * j + a)];
                const CMatrix& ck = c[static_cast<std::size_t>(2 * k + a)];
                H -= cj.adjoint() * ck + ck.adjoint() * cj;
            }
        const CMatrix nu = c[static_cast<std::size_t>(2 * j)].adjoint() * c[static_cast<std::size_t>(2 * j)];
        const CMatrix nd = c[static_cast<std::size_t>(2 * j + 1)].adjoint() * c[static_cast<std::size_t>(2 * j + 1)];
        H += u * (Id - 2.0 * nu) * (Id - 2.0 * nd);
    }
    return H;
}

std::vector<double> block_spectrum(int L, double u, int N, int M)
{
    auto h = build_hubbard_hamiltonian(L, u, N, M);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix.dense(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

double distance_to_spectrum(double E, const std::vector<double>& spec)
{
    double d = 1e300;
    for (double e : spec) d = std::min(d, std::abs(e - E));
    return d;
}

// Levels of the (N, M) block that are not descendants from the (N, M - 1) block.
std::vector<double> highest_weight_spectrum(int L, double u, int N, int M)
{
    auto spec = block_spectrum(L, u, N, M);
    if (M == 0) return spec;
    std::vector<double> out;
    auto lower = block_spectrum(L, u, N, M - 1);
    std::vector<bool> used(lower.size(), false);
    for (double e : spec) {
        bool matched = false;
        for (std::size_t i = 0; i < lower.size() && !matched; ++i)
            if (!used[i] && std::abs(lower[i] - e) < 1e-9) used[i] = matched = true;
        if (!matched) out.push_back(e);
    }
    return out;
}

NestedRoots ground(int L, int N, int M, double u)
{
    auto rep = solve_liebwu(L, N, M, u, liebwu_ground_state_qnums(L, N, M));
    EXPECT_TRUE(rep.converged) << rep.residual;
    return rep.roots;
}

} // namespace

TEST(FermionBasis, DimensionAndOrdering)
{
    for (auto [L, N, M] : {std::tuple{4, 2, 1}, std::tuple{6, 3, 1}, std::tuple{5, 4, 2}, std::tuple{3, 6, 3}}) {
        FermionBasis b(L, N, M);
        EXPECT_EQ(b.size(), binomial(L, N - M) * binomial(L, M));
        for (std::size_t i = 0; i < b.size(); ++i) {
            auto [x, a] = b.configuration(i);
            EXPECT_EQ(static_cast<int>(x.size()), N);
            EXPECT_EQ(std::count(a.begin(), a.end(), Spin::down), M);
            if (i > 0) {
                EXPECT_LT(b.state(i - 1), b.state(i));
            }
        }
    }
    EXPECT_THROW(FermionBasis(3, 5, 1), DomainError);
}

TEST(HubbardHamiltonian, SingleSite)
{
    const double u = 0.7;
    std::vector<double> all;
    for (auto [N, M] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 1}})
        for (double e : block_spectrum(1, u, N, M)) all.push_back(e);
    std::sort(all.begin(), all.end());
    const std::vector<double> ref{-u, -u, u, u};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(all[i], ref[i], 1e-15);
}

TEST(HubbardHamiltonian, BlocksReproduceFockSpaceSpectrum)
{
    for (int L : {2, 3})
        for (double u : {1.0, -0.6}) {
            std::vector<double> all;
            for (int N = 0; N <= 2 * L; ++N)
                for (int M = std::max(0, N - L); M <= std::min(N, L); ++M) {
                    auto h = build_hubbard_hamiltonian(L, u, N, M);
                    EXPECT_LT(h.matrix.hermiticity_defect(), 1e-15);
                    for (double e : block_spectrum(L, u, N, M)) all.push_back(e);
                }
            std::sort(all.begin(), all.end());
            auto ref = oracle::sorted_eigenvalues(jw_hubbard(L, u));
            ASSERT_EQ(all.size(), ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(all[i], ref[i], 1e-12) << L << " " << u;
        }
}

TEST(HubbardHamiltonian, FreeFermions)
{
    const int L = 5;
    std::vector<double> eps;
    for (int m = 0; m < L; ++m) eps.push_back(-2.0 * std::cos(2 * pi * m / L));
    std::vector<double> ref;
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
            for (int r = q + 1; r < L; ++r) ref.push_back(eps[p] + eps[q] + eps[r]);
    std::sort(ref.begin(), ref.end());
    auto spec = block_spectrum(L, 0.0, 3, 1);
    ASSERT_EQ(spec.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(spec[i], ref[i], 1e-12);
}

TEST(HubbardHamiltonian, TwoSitesHalfFilledSinglet)
{
    const double u = 1.0;
    auto spec = block_spectrum(2, u, 2, 1);
    ASSERT_EQ(spec.size(), 4u);
    auto ref = oracle::sorted_eigenvalues(jw_hubbard(2, u));
    for (double e : spec) EXPECT_LT(distance_to_spectrum(e, ref), 1e-12);
}

TEST(LiebWu, FreeMomentaWithoutDownSpins)
{
    NestedRoots r{6, 1.0, {0.0, 2 * pi / 6, -2 * pi / 6, pi}, {}};
    EXPECT_LT(liebwu_residual(r), 1e-14);
    r.k[1] += 0.3;
    EXPECT_GT(liebwu_residual(r), 1e-2);
}

TEST(LiebWu, SolverReachesGroundStates)
{
    auto r1 = ground(6, 2, 1, 1.0);
    EXPECT_LT(liebwu_residual(r1), 1e-11);
    EXPECT_NEAR(energy_momentum(r1).first.real(), -1.68447136, 1e-8);
    for (double u : {1.0, 2.0}) {
        auto r = ground(6, 2, 1, u);
        auto spec = block_spectrum(6, u, 2, 1);
        EXPECT_NEAR(energy_momentum(r).first.real(), spec.front(), 1e-9) << u;
    }
    // at L = 6, N = 4 the block minimum is a triplet; the Bethe state is the lowest singlet
    auto r3 = ground(6, 4, 2, 1.5);
    EXPECT_LT(block_spectrum(6, 1.5, 4, 2).front(), -7.39);
    EXPECT_NEAR(energy_momentum(r3).first.real(), highest_weight_spectrum(6, 1.5, 4, 2).front(), 1e-9);
    auto r4 = ground(8, 4, 2, 1.0);
    EXPECT_NEAR(energy_momentum(r4).first.real(), highest_weight_spectrum(8, 1.0, 4, 2).front(), 1e-9);
}

TEST(LiebWu, PerturbedRootsFail)
{
    auto r = ground(6, 2, 1, 1.0);
    r.lambda[0] += 0.5;
    EXPECT_GT(liebwu_residual(r), 1e-2);
}

TEST(LiebWu, StrongCouplingApproachesFreeMomenta)
{
    const int L = 6, N = 3, M = 1;
    auto q = liebwu_ground_state_qnums(L, N, M);
    auto rep = solve_liebwu(L, N, M, 1e3, q);
    ASSERT_TRUE(rep.converged);
    // k_j L - 2 pi n_j - M pi tends to a twist common to all electrons, fixed by the spin rapidities
    double twist = 0.0;
    for (Complex l : rep.roots.lambda) twist += 2 * std::atan(l.real() / rep.roots.u);
    for (int j = 0; j < N; ++j)
        EXPECT_NEAR(rep.roots.k[static_cast<std::size_t>(j)].real() * L - 2 * pi * q.n[static_cast<std::size_t>(j)] - M * pi, twist, 1e-2);
}

TEST(LiebWu, SingleElectron)
{
    for (int n = -2; n <= 3; ++n) {
        auto rep = solve_liebwu(6, 1, 0, 1.0, {{n}, {}});
        ASSERT_TRUE(rep.converged);
        EXPECT_NEAR(rep.roots.k[0].real(), 2 * pi * n / 6, 1e-14);
    }
}

TEST(LiebWu, EveryRealSolutionIsInTheSpectrum)
{
    for (auto [L, N, M, u] : {std::tuple{4, 2, 1, 1.0}, std::tuple{5, 3, 1, 0.8}, std::tuple{6, 2, 1, 2.0}, std::tuple{4, 4, 2, 1.2}}) {
        auto hw = highest_weight_spectrum(L, u, N, M);
        int found = 0;
        std::vector<int> n(static_cast<std::size_t>(N)), m(static_cast<std::size_t>(M));
        // charge numbers distinct mod L (otherwise two momenta coincide), spin numbers in a small range
        std::function<void(int, int)> rec_n, rec_m;
        std::vector<std::vector<int>> ns, ms;
        rec_n = [&](int pos, int start) {
            if (pos == N) {
                ns.push_back(n);
                return;
            }
            for (int v = start; v < L - L / 2; ++v) {
                n[static_cast<std::size_t>(pos)] = v;
                rec_n(pos + 1, v + 1);
            }
        };
        rec_m = [&](int pos, int start) {
            if (pos == M) {
                ms.push_back(m);
                return;
            }
            for (int v = start; v <= N; ++v) {
                m[static_cast<std::size_t>(pos)] = v;
                rec_m(pos + 1, v + 1);
            }
        };
        rec_n(0, -L / 2);
        rec_m(0, -N);
        for (const auto& nn : ns)
            for (const auto& mm : ms) {
                auto rep = solve_liebwu(L, N, M, u, {nn, mm});
                if (!rep.converged) continue;
                ++found;
                EXPECT_LT(distance_to_spectrum(energy_momentum(rep.roots).first.real(), hw), 1e-8) << L << N << M;
            }
        EXPECT_GT(found, 0);
    }
}

TEST(LiebWu, CoincidentMomentaAreFlagged)
{
    // n = 5 and n = -1 give the same free momentum at L = 6, M = 2
    auto rep = solve_liebwu(6, 4, 2, 1.5, {{-2, -1, 0, 5}, {1, 2}});
    if (rep.converged) {
        EXPECT_FALSE(rep.admissible);
        EXPECT_LT(energy_momentum(rep.roots).first.real(), block_spectrum(6, 1.5, 4, 2).front() - 1.0);
    }
    EXPECT_TRUE(solve_liebwu(6, 4, 2, 1.5, liebwu_ground_state_qnums(6, 4, 2)).admissible);
}

TEST(NestedWavefunction, SlaterDeterminantWithoutDownSpins)
{
    NestedRoots r{7, 1.0, {0.3, -1.1, 2.0}, {}};
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> site(1, 7);
    for (int t = 0; t < 20; ++t) {
        std::vector<int> x{site(rng), site(rng), site(rng)};
        CMatrix m(3, 3);
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l) m(j, l) = std::exp(I * r.k[static_cast<std::size_t>(j)] * static_cast<double>(x[static_cast<std::size_t>(l)]));
        const Complex psi = nested_wavefunction(x, {Spin::up, Spin::up, Spin::up}, r);
        EXPECT_LT(std::abs(psi - m.determinant()), 1e-12);
    }
}

TEST(NestedWavefunction, WrongDownSpinCountVanishes)
{
    NestedRoots r{5, 1.0, {0.3, -1.1, 2.0}, {0.2}};
    EXPECT_EQ(nested_wavefunction({1, 2, 4}, {Spin::up, Spin::up, Spin::up}, r), Complex(0.0));
    EXPECT_EQ(nested_wavefunction({1, 2, 4}, {Spin::down, Spin::up, Spin::down}, r), Complex(0.0));
}

TEST(NestedWavefunction, AntisymmetricUnderExchange)
{
    NestedRoots r{7, 1.3, {0.3, -1.1, 2.0, 0.7}, {0.2, -0.5}};
    std::mt19937_64 rng(3);
    std::vector<int> x{1, 3, 4, 6};
    std::vector<Spin> a{Spin::up, Spin::down, Spin::up, Spin::down};
    for (int t = 0; t < 20; ++t) {
        std::shuffle(x.begin(), x.end(), rng);
        std::shuffle(a.begin(), a.end(), rng);
        const Complex psi = nested_wavefunction(x, a, r);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) {
                auto x2 = x;
                auto a2 = a;
                std::swap(x2[i], x2[j]);
                std::swap(a2[i], a2[j]);
                EXPECT_LT(std::abs(nested_wavefunction(x2, a2, r) + psi), 1e-10 * std::max(1.0, std::abs(psi)));
            }
    }
}

TEST(NestedWavefunction, SectorFormulasAgreeAtCoincidentCoordinates)
{
    NestedRoots r{6, 0.9, {0.4, -0.8, 1.7}, {0.3}};
    const std::vector<int> x{2, 2, 5};
    const std::vector<Spin> a{Spin::up, Spin::down, Spin::up};
    const Complex id = nested_wavefunction_in_sector(x, a, {0, 1, 2}, r);
    const Complex swapped = nested_wavefunction_in_sector(x, a, {1, 0, 2}, r);
    EXPECT_LT(std::abs(id - swapped), 1e-12 * std::abs(id));
}

TEST(NestedWavefunction, OnShellStateIsAnEigenvector)
{
    for (auto [L, N, M, u] : {std::tuple{6, 2, 1, 1.0}, std::tuple{6, 2, 1, 2.0}, std::tuple{5, 3, 1, 0.8}, std::tuple{6, 4, 2, 1.5}}) {
        auto r = ground(L, N, M, u);
        auto h = build_hubbard_hamiltonian(L, u, N, M);
        const CVector psi = nested_state(r, *h.basis);
        ASSERT_GT(psi.norm(), 1e-8);
        const auto [E, P] = energy_momentum(r);
        EXPECT_LT((h.matrix.apply(psi) - E.real() * psi).norm() / psi.norm(), 1e-8);
        // highest weight with respect to the total spin
        EXPECT_LT(apply_spin_raise(*h.basis, psi).norm() / psi.norm(), 1e-8);
        // translation eigenvalue
        auto T = build_hubbard_translation(L, N, M);
        EXPECT_LT((T.matrix.apply(psi) - std::exp(-I * P) * psi).norm() / psi.norm(), 1e-8);
    }
}

TEST(NestedWavefunction, ExcitedStatesAreEigenvectors)
{
    const int L = 5, N = 3, M = 1;
    const double u = 0.8;
    auto h = build_hubbard_hamiltonian(L, u, N, M);
    int checked = 0;
    for (int n0 = -2; n0 <= 0; ++n0)
        for (int mm = -1; mm <= 2; ++mm) {
            auto rep = solve_liebwu(L, N, M, u, {{n0, n0 + 1, n0 + 3}, {mm}});
            if (!rep.converged) continue;
            const CVector psi = nested_state(rep.roots, *h.basis);
            if (psi.norm() < 1e-8) continue;
            ++checked;
            EXPECT_LT((h.matrix.apply(psi) - energy_momentum(rep.roots).first.real() * psi).norm() / psi.norm(), 1e-8);
        }
    EXPECT_GT(checked, 0);
}

TEST(EnergyMomentum, EmptyAndFree)
{
    auto [E0, P0] = energy_momentum(NestedRoots{5, 0.7, {}, {}});
    EXPECT_NEAR(E0.real(), 3.5, 1e-15);
    EXPECT_EQ(P0, 0.0);
    auto [E1, P1] = energy_momentum(NestedRoots{4, 0.0, {0.0, pi / 2}, {}});
    EXPECT_NEAR(E1.real(), -2.0, 1e-15);
    EXPECT_NEAR(P1, pi / 2, 1e-15);
}
