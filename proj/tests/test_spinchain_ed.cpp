#include <bethe/spinchain_ed.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "oracles.hpp"

using namespace bethe;

namespace {

std::vector<double> eigenvalues(const OperatorMatrix& H)
{
    auto sp = diagonalize(H, {.vectors = false});
    return {sp.eigenvalues.data(), sp.eigenvalues.data() + sp.eigenvalues.size()};
}

} // namespace

TEST(SectorBasis, SizesAreBinomial)
{
    EXPECT_EQ(SectorBasis(4, 2).size(), 6u);
    EXPECT_EQ(SectorBasis(12, 6).size(), 924u);
    EXPECT_EQ(SectorBasis(8, 0).size(), 1u);
    EXPECT_EQ(SectorBasis(8, 8).size(), 1u);
    EXPECT_THROW(SectorBasis(25, 1), DomainError);
    EXPECT_THROW(SectorBasis(4, 5), DomainError);
}

TEST(SectorBasis, StatesSortedWithCorrectPopcount)
{
    SectorBasis b(10, 4);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_EQ(popcount(b.state(i)), 4);
        if (i > 0) {
            EXPECT_LT(b.state(i - 1), b.state(i));
        }
        EXPECT_EQ(b.index(b.state(i)), i);
        EXPECT_EQ(SectorBasis::config_of(b.positions(i)), b.state(i));
    }
    EXPECT_FALSE(b.find(0b111).has_value());
}

TEST(Hamiltonian, TwoSiteChainDoubleCountsTheBond)
{
    auto ev = eigenvalues(build_xxx_hamiltonian(2, 1.0));
    ASSERT_EQ(ev.size(), 4u);
    EXPECT_NEAR(ev[0], -2.0, 1e-12);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev[i], 0.0, 1e-12);
}

TEST(Hamiltonian, MatchesKroneckerOracle)
{
    for (int L : {3, 4, 5, 6}) {
        for (double delta : {1.0, 0.3, -0.8, 2.5}) {
            CMatrix ref = oracle::heisenberg(L, 1.0, delta);
            CMatrix got = build_xxz_hamiltonian(L, delta).dense();
            EXPECT_LT(max_abs(ref - got), 1e-14) << "L=" << L << " delta=" << delta;
        }
        CMatrix ref = oracle::heisenberg(L, -1.7, 1.0);
        EXPECT_LT(max_abs(ref - build_xxx_hamiltonian(L, -1.7).dense()), 1e-14);
    }
}

TEST(Hamiltonian, FourSiteSpectrumMatchesOracle)
{
    auto ref = oracle::sorted_eigenvalues(oracle::heisenberg(4, 1.0, 1.0));
    auto got = eigenvalues(build_xxx_hamiltonian(4, 1.0));
    ASSERT_EQ(ref.size(), got.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(ref[i], got[i], 1e-12);
    EXPECT_NEAR(got.front(), -3.0, 1e-12);
}

TEST(Hamiltonian, SectorBlockMatchesFullSpaceRestriction)
{
    const int L = 7;
    CMatrix full = build_xxz_hamiltonian(L, 0.6).dense();
    for (int N = 0; N <= L; ++N) {
        auto basis = build_sector_basis(L, N);
        CMatrix block = build_xxz_hamiltonian(L, 0.6, basis).dense();
        for (std::size_t i = 0; i < basis->size(); ++i)
            for (std::size_t j = 0; j < basis->size(); ++j)
                EXPECT_EQ(block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                          full(static_cast<Eigen::Index>(basis->state(i)), static_cast<Eigen::Index>(basis->state(j))));
    }
}

TEST(Hamiltonian, FullSpectrumIsUnionOfSectorSpectra)
{
    const int L = 8;
    std::vector<double> all;
    for (int N = 0; N <= L; ++N) {
        auto ev = eigenvalues(build_xxz_hamiltonian(L, 0.4, build_sector_basis(L, N)));
        all.insert(all.end(), ev.begin(), ev.end());
    }
    std::sort(all.begin(), all.end());
    auto full = eigenvalues(build_xxz_hamiltonian(L, 0.4));
    ASSERT_EQ(all.size(), full.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_NEAR(all[i], full[i], 1e-10);
}

TEST(Hamiltonian, SignOfJInvertsTheSpectrum)
{
    auto plus = eigenvalues(build_xxx_hamiltonian(6, 1.0));
    auto minus = eigenvalues(build_xxx_hamiltonian(6, -1.0));
    std::reverse(minus.begin(), minus.end());
    for (std::size_t i = 0; i < plus.size(); ++i) EXPECT_NEAR(plus[i], -minus[i], 1e-10);
}

TEST(Symmetry, CommutatorsWithShiftAndSpin)
{
    for (int L : {4, 6, 8}) {
        auto H = build_xxx_hamiltonian(L, 1.0);
        EXPECT_LT(commutator_norm(H, build_shift_operator(L)), 1e-12);
        EXPECT_LT(commutator_norm(H, build_total_spin(L, SpinComponent::x)), 1e-12);
        EXPECT_LT(commutator_norm(H, build_total_spin(L, SpinComponent::y)), 1e-12);
        EXPECT_LT(commutator_norm(H, build_total_spin(L, SpinComponent::z)), 1e-12);
        for (double delta : {0.2, -1.3}) {
            auto X = build_xxz_hamiltonian(L, delta);
            EXPECT_TRUE(X.hermitian);
            EXPECT_LT(X.hermiticity_defect(), 1e-14);
            EXPECT_LT(commutator_norm(X, build_shift_operator(L)), 1e-12);
            EXPECT_LT(commutator_norm(X, build_total_spin(L, SpinComponent::z)), 1e-12);
        }
    }
    EXPECT_GT(commutator_norm(build_xxz_hamiltonian(4, 0.5), build_total_spin(4, SpinComponent::x)), 0.1);
}

TEST(Symmetry, SectorShiftCommutesWithSectorHamiltonian)
{
    auto basis = build_sector_basis(10, 4);
    EXPECT_LT(commutator_norm(build_xxz_hamiltonian(10, 0.7, basis), build_shift_operator(10, basis)), 1e-12);
}

TEST(Symmetry, CommutatorRejectsDimensionMismatch)
{
    EXPECT_THROW(commutator_norm(build_xxx_hamiltonian(4, 1.0), build_xxx_hamiltonian(5, 1.0)), std::invalid_argument);
}

TEST(ShiftOperator, LthPowerIsIdentityAndMovesSpinsRight)
{
    for (int L : {2, 3, 5, 8}) {
        CMatrix U = build_shift_operator(L).dense();
        CMatrix P = CMatrix::Identity(U.rows(), U.cols());
        for (int i = 0; i < L; ++i) P = U * P;
        EXPECT_LT(max_abs(P - CMatrix::Identity(U.rows(), U.cols())), 1e-15);
    }
    // a down spin on site 1 goes to site 2
    CMatrix U = build_shift_operator(4).dense();
    EXPECT_EQ(U(0b0010, 0b0001), Complex(1.0));
    EXPECT_EQ(U(0b0001, 0b1000), Complex(1.0));
}

TEST(TotalSpin, MatchesKroneckerOracle)
{
    const int L = 5;
    EXPECT_LT(max_abs(build_total_spin(L, SpinComponent::x).dense() - oracle::total(L, 'x')), 1e-14);
    EXPECT_LT(max_abs(build_total_spin(L, SpinComponent::y).dense() - oracle::total(L, 'y')), 1e-14);
    EXPECT_LT(max_abs(build_total_spin(L, SpinComponent::z).dense() - oracle::total(L, 'z')), 1e-14);
    EXPECT_LT(max_abs(build_total_spin(L, SpinComponent::raise).dense() - oracle::total(L, '+')), 1e-14);
    EXPECT_LT(max_abs(build_total_spin(L, SpinComponent::lower).dense() - oracle::total(L, '-')), 1e-14);
    CMatrix sx = oracle::total(L, 'x'), sy = oracle::total(L, 'y'), sz = oracle::total(L, 'z');
    EXPECT_LT(max_abs(build_total_spin(L, SpinComponent::casimir).dense() - (sx * sx + sy * sy + sz * sz)), 1e-12);
}

TEST(TotalSpin, SectorRaiseLowerAndCasimirAgreeWithFullSpace)
{
    const int L = 6, N = 2;
    SectorBasis from(L, N), up(L, N - 1), down(L, N + 1);
    std::mt19937_64 rng(7);
    CVector v = oracle::random_vector(static_cast<Eigen::Index>(from.size()), rng);
    CVector full = embed(v, from);
    EXPECT_LT((embed(raise_in_sector(v, from, up), up) - oracle::total(L, '+') * full).norm(), 1e-12);
    EXPECT_LT((embed(lower_in_sector(v, from, down), down) - oracle::total(L, '-') * full).norm(), 1e-12);
    auto basis = build_sector_basis(L, N);
    CVector cv = build_casimir(basis).apply(v);
    EXPECT_LT((embed(cv, from) - build_total_spin(L, SpinComponent::casimir).apply(full)).norm(), 1e-12);
}

TEST(Multiplets, XXXLevelsDecomposeIntoSU2Multiplets)
{
    const int L = 6;
    auto H = build_xxx_hamiltonian(L, 1.0);
    auto sp = diagonalize(H);
    CMatrix C = build_total_spin(L, SpinComponent::casimir).dense();
    Eigen::Index start = 0;
    for (auto [value, mult] : degenerate_levels(sp.eigenvalues)) {
        CMatrix V = sp.eigenvectors->middleCols(start, mult);
        CMatrix c = V.adjoint() * C * V;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (c + c.adjoint()));
        std::map<int, int> count_by_twice_s;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double s = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * es.eigenvalues()[i]));
            const double two_s = 2.0 * s;
            ASSERT_NEAR(two_s, std::round(two_s), 1e-8) << "level " << value;
            ++count_by_twice_s[static_cast<int>(std::lround(two_s))];
        }
        for (auto [two_s, n] : count_by_twice_s) EXPECT_EQ(n % (two_s + 1), 0) << "level " << value;
        start += mult;
    }
    EXPECT_EQ(start, sp.eigenvalues.size());
}

TEST(Diagonalize, RejectsNonHermitianInput)
{
    EXPECT_THROW(diagonalize(build_shift_operator(4)), DomainError);
}

TEST(Diagonalize, LanczosAgreesWithDenseSolver)
{
    auto H = build_xxx_hamiltonian(10, 1.0, build_sector_basis(10, 5));
    auto dense = diagonalize(H, {.count = 6});
    auto lanczos = diagonalize(H, {.count = 6, .dense_limit = 0});
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(dense.eigenvalues[i], lanczos.eigenvalues[i], 1e-10);
    for (int i = 0; i < 6; ++i) {
        CVector v = lanczos.eigenvectors->col(i);
        EXPECT_LT((H.apply(v) - lanczos.eigenvalues[i] * v).norm(), 1e-8);
    }
}

TEST(Diagonalize, LanczosResolvesDegenerateLevels)
{
    // full-space XXX levels are SU(2) multiplets, so the lowest few are degenerate
    auto H = build_xxx_hamiltonian(8, 1.0);
    auto dense = diagonalize(H, {.count = 10, .vectors = false});
    auto lanczos = diagonalize(H, {.count = 10, .vectors = false, .dense_limit = 0});
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(dense.eigenvalues[i], lanczos.eigenvalues[i], 1e-9);
}

TEST(Diagonalize, DegenerateLevelGrouping)
{
    RVector v(5);
    v << -1.0, -1.0 + 1e-11, 0.0, 0.5, 0.5;
    auto lv = degenerate_levels(v);
    ASSERT_EQ(lv.size(), 3u);
    EXPECT_EQ(lv[0].second, 2);
    EXPECT_EQ(lv[1].second, 1);
    EXPECT_EQ(lv[2].second, 2);
}
