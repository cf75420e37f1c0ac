#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

namespace bethe {

/// Visit every permutation of {0, ..., n-1} with its sign, using Heap's
/// algorithm. `visit(perm, sign)` receives the permutation as a vector where
/// perm[i] is the image of i; consecutive permutations differ by a single
/// transposition so the sign flips on every step.
template <typename Visitor>
void for_each_permutation(int n, Visitor&& visit)
{
    std::vector<int> perm(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(perm.begin(), perm.end(), 0);
    int sign = 1;
    visit(static_cast<const std::vector<int>&>(perm), sign);
    if (n <= 1) return;

    std::vector<int> c(static_cast<std::size_t>(n), 0);
    int i = 1;
    while (i < n) {
        if (c[i] < i) {
            if (i % 2 == 0)
                std::swap(perm[0], perm[i]);
            else
                std::swap(perm[c[i]], perm[i]);
            sign = -sign;
            visit(static_cast<const std::vector<int>&>(perm), sign);
            ++c[i];
            i = 1;
        } else {
            c[i] = 0;
            ++i;
        }
    }
}

/// Sign of an arbitrary permutation given as an image vector.
inline int permutation_sign(std::vector<int> p)
{
    int s = 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (p[i] != static_cast<int>(i)) {
            std::swap(p[i], p[static_cast<std::size_t>(p[i])]);
            s = -s;
        }
    }
    return s;
}

/// Sum of terms exp(log_term) kept as (log scale, mantissa) so that products of
/// many large factors do not overflow before they cancel.
class LogSum {
public:
    void add(std::complex<double> log_term)
    {
        terms_.push_back(log_term);
        max_re_ = std::max(max_re_, log_term.real());
    }

    /// Largest |term| as a natural log; -inf when every term vanished.
    double log_scale() const { return max_re_; }

    /// Sum divided by exp(log_scale()).
    std::complex<double> mantissa() const
    {
        if (!std::isfinite(max_re_)) return {0.0, 0.0};
        std::complex<double> s{0.0, 0.0};
        for (const auto& t : terms_) {
            if (!std::isfinite(t.real())) continue;
            s += std::exp(t - max_re_);
        }
        return s;
    }

    std::complex<double> value() const
    {
        if (!std::isfinite(max_re_)) return {0.0, 0.0};
        return mantissa() * std::exp(max_re_);
    }

private:
    std::vector<std::complex<double>> terms_;
    double max_re_ = -std::numeric_limits<double>::infinity();
};

/// log of a complex number; log(0) is (-inf, 0) rather than NaN.
inline std::complex<double> safe_log(std::complex<double> z)
{
    if (z == std::complex<double>{0.0, 0.0})
        return {-std::numeric_limits<double>::infinity(), 0.0};
    return std::log(z);
}

} // namespace bethe
