#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bethe {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

/// Thrown when an argument lies outside the mathematical domain of an operation
/// (poles, out-of-range sizes, non-Hermitian input to a Hermitian solver).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw DomainError(what);
}

inline int popcount(std::uint64_t x) { return __builtin_popcountll(x); }

inline std::uint64_t binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

/// Reduce an angle into [0, 2 pi).
inline double mod_two_pi(double x)
{
    double r = std::fmod(x, 2.0 * pi);
    if (r < 0) r += 2.0 * pi;
    if (r >= 2.0 * pi) r -= 2.0 * pi;
    return r;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double x)
{
    double r = mod_two_pi(x);
    return r > pi ? r - 2.0 * pi : r;
}

/// Complex log difference with the imaginary part wrapped into (-pi, pi],
/// i.e. the distance of two points on the log-cover modulo 2 pi i.
inline Complex wrapped(Complex z) { return {z.real(), wrap_pi(z.imag())}; }

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Overlap |<a|b>| / (|a| |b|): the cosine of the angle between two complex vectors.
inline double collinearity(const CVector& a, const CVector& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(a.dot(b)) / (na * nb);
}

} // namespace bethe
