#pragma once

// Independent reference constructions used by the tests. Nothing here calls
// into the library's builders; operators are formed from dense Kronecker
// products of 2x2 matrices.

#include <bethe/core.hpp>

#include <random>
#include <vector>

namespace oracle {

using bethe::CMatrix;
using bethe::Complex;
using bethe::CVector;

inline CMatrix pauli(char which)
{
    CMatrix m = CMatrix::Zero(2, 2);
    // local index 0 = up, 1 = down
    switch (which) {
    case 'x': m(0, 1) = m(1, 0) = 0.5; break;
    case 'y': m(0, 1) = Complex(0, -0.5); m(1, 0) = Complex(0, 0.5); break;
    case 'z': m(0, 0) = 0.5; m(1, 1) = -0.5; break;
    case '+': m(0, 1) = 1.0; break;
    case '-': m(1, 0) = 1.0; break;
    default: m = CMatrix::Identity(2, 2);
    }
    return m;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b)
{
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

/// Single-site operator m on site j (1-based) of an L-site chain; site 1 is
/// the fastest-varying factor so the row index equals the configuration word.
inline CMatrix site_op(int L, int j, const CMatrix& m)
{
    CMatrix r = CMatrix::Identity(1, 1);
    for (int s = L; s >= 1; --s) r = kron(r, s == j ? m : CMatrix::Identity(2, 2));
    return r;
}

/// sum_j [s^x s^x + s^y s^y + Delta (s^z s^z - 1/4)] times J, periodic.
inline CMatrix heisenberg(int L, double J, double delta)
{
    const Eigen::Index d = Eigen::Index{1} << L;
    CMatrix H = CMatrix::Zero(d, d);
    for (int j = 1; j <= L; ++j) {
        const int k = j % L + 1;
        H += site_op(L, j, pauli('x')) * site_op(L, k, pauli('x'));
        H += site_op(L, j, pauli('y')) * site_op(L, k, pauli('y'));
        H += delta * (site_op(L, j, pauli('z')) * site_op(L, k, pauli('z')) - 0.25 * CMatrix::Identity(d, d));
    }
    return J * H;
}

inline CMatrix total(int L, char which)
{
    const Eigen::Index d = Eigen::Index{1} << L;
    CMatrix S = CMatrix::Zero(d, d);
    for (int j = 1; j <= L; ++j) S += site_op(L, j, pauli(which));
    return S;
}

inline std::vector<double> sorted_eigenvalues(const CMatrix& H)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return v;
}

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CVector v(n);
    for (auto& x : v) x = Complex(g(rng), g(rng));
    return v;
}

} // namespace oracle
