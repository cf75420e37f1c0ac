#pragma once

// Ground-state root density of the XXX chain in the thermodynamic limit:
//   rho(l|q) = (2/pi) / (1 + 4 l^2) - int_{-q}^{q} dm/pi rho(m|q) / (1 + (l - m)^2),
// solved by Nystrom discretization on Gauss-Legendre nodes. For q = infinity the
// Fourier solution 1/(2 ch(pi l)) is used on a tanh-mapped grid.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "bethe_equations.hpp"
#include "core.hpp"

namespace bethe {

inline constexpr double infinite_support = std::numeric_limits<double>::infinity();

struct RootDensity {
    double q = infinite_support; // support half-width
    RVector nodes;               // abscissae in (-q, q), or on the real line when q is infinite
    RVector weights;             // quadrature weights for integrals over the support
    RVector values;              // rho at the nodes
};

/// Gauss-Legendre nodes and weights on (-1, 1), ascending.
inline std::pair<RVector, RVector> gauss_legendre(int n)
{
    require(n >= 1, "gauss_legendre: need at least one node");
    const auto zeros = boost::math::legendre_p_zeros<double>(n); // non-negative half, ascending
    std::vector<double> x;
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
        if (*it > 0.0) x.push_back(-*it);
    if (n % 2 == 1) x.push_back(0.0);
    for (double z : zeros)
        if (z > 0.0) x.push_back(z);
    RVector nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        const double dp = boost::math::legendre_p_prime(n, xi);
        nodes[i] = xi;
        weights[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    return {nodes, weights};
}

namespace detail {

inline double driving_term(double l) { return (2.0 / pi) / (1.0 + 4.0 * l * l); }
inline double density_kernel(double x) { return 1.0 / (pi * (1.0 + x * x)); }

/// Real-line grid l = (4/pi) artanh(t) on Gauss-Legendre t; dl = (4/pi) dt / (1 - t^2).
/// Under this map the closed-form density times the Jacobian is rational in t.
inline std::pair<RVector, RVector> mapped_line_grid(int n)
{
    auto [t, w] = gauss_legendre(n);
    RVector l(n), wl(n);
    for (int i = 0; i < n; ++i) {
        l[i] = (4.0 / pi) * std::atanh(t[i]);
        wl[i] = w[i] * (4.0 / pi) / (1.0 - t[i] * t[i]);
    }
    return {l, wl};
}

} // namespace detail

/// Closed form of the q = infinity density.
inline double infinite_density(double l) { return 0.5 / std::cosh(pi * l); }

/// Solve the root-density equation. q > 0 finite uses the Nystrom method;
/// q = infinity (or any non-finite q) returns the Fourier solution on the mapped grid.
inline RootDensity solve_root_density(double q, int n_nodes = 128)
{
    require(q > 0.0, "solve_root_density: need q > 0");
    require(n_nodes >= 2, "solve_root_density: need at least two nodes");
    RootDensity rho;
    rho.q = q;
    if (!std::isfinite(q)) {
        rho.q = infinite_support;
        std::tie(rho.nodes, rho.weights) = detail::mapped_line_grid(n_nodes);
        rho.values = rho.nodes.unaryExpr([](double l) { return infinite_density(l); });
        return rho;
    }
    auto [x, w] = gauss_legendre(n_nodes);
    rho.nodes = q * x;
    rho.weights = q * w;
    RMatrix A(n_nodes, n_nodes);
    RVector b(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        b[i] = detail::driving_term(rho.nodes[i]);
        for (int k = 0; k < n_nodes; ++k) A(i, k) = rho.weights[k] * detail::density_kernel(rho.nodes[i] - rho.nodes[k]);
        A(i, i) += 1.0;
    }
    Eigen::PartialPivLU<RMatrix> lu(A);
    require(std::abs(lu.determinant()) > 1e-300, "solve_root_density: singular Nystrom system");
    rho.values = lu.solve(b);
    require(rho.values.allFinite() && (A * rho.values - b).cwiseAbs().maxCoeff() < 1e-10,
            "solve_root_density: singular Nystrom system");
    return rho;
}

/// rho(l|q) anywhere: the Nystrom interpolant for finite q, the closed form otherwise.
/// Returns 0 outside (-q, q).
inline double evaluate_density(const RootDensity& rho, double l)
{
    if (!std::isfinite(rho.q)) return infinite_density(l);
    if (std::abs(l) > rho.q) return 0.0;
    double s = detail::driving_term(l);
    for (Eigen::Index k = 0; k < rho.nodes.size(); ++k)
        s -= rho.weights[k] * detail::density_kernel(l - rho.nodes[k]) * rho.values[k];
    return s;
}

/// int rho(l|q) f(l) dl by the density's own quadrature.
inline double integrate_density(const RootDensity& rho, const std::function<double(double)>& f)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < rho.nodes.size(); ++k) s += rho.weights[k] * rho.values[k] * f(rho.nodes[k]);
    return s;
}

/// D = int rho(l|q) dl.
inline double density_D(const RootDensity& rho)
{
    return integrate_density(rho, [](double) { return 1.0; });
}

/// e = -(J/2) int rho(l|q) / (l^2 + 1/4) dl.
inline double gs_energy_density(const RootDensity& rho, double J)
{
    return -0.5 * J * integrate_density(rho, [](double l) { return 1.0 / (l * l + 0.25); });
}

/// Max deviation from the integral equation at the midpoints between nodes,
/// with the integral re-evaluated on an independent finer quadrature.
inline double integral_equation_residual(const RootDensity& rho)
{
    const Eigen::Index n = rho.nodes.size();
    RVector fine_l, fine_w;
    if (std::isfinite(rho.q)) {
        auto [x, w] = gauss_legendre(static_cast<int>(2 * n + 7));
        fine_l = rho.q * x;
        fine_w = rho.q * w;
    } else {
        std::tie(fine_l, fine_w) = detail::mapped_line_grid(static_cast<int>(2 * n + 7));
    }
    RVector fine_rho = fine_l.unaryExpr([&](double l) { return evaluate_density(rho, l); });
    double worst = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double l = 0.5 * (rho.nodes[i] + rho.nodes[i + 1]);
        double s = evaluate_density(rho, l) - detail::driving_term(l);
        for (Eigen::Index k = 0; k < fine_l.size(); ++k)
            s += fine_w[k] * detail::density_kernel(l - fine_l[k]) * fine_rho[k];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

/// n(l) = (1/pi) atan(2 l) - int dm/pi rho(m|q) atan(l - m): the continuum
/// counting function whose derivative is rho.
inline double counting_function(const RootDensity& rho, double l)
{
    double s = std::atan(2.0 * l) / pi;
    for (Eigen::Index k = 0; k < rho.nodes.size(); ++k)
        s -= rho.weights[k] * rho.values[k] * std::atan(l - rho.nodes[k]) / pi;
    return s;
}

struct CondensationRow {
    int L = 0;
    double sum = 0.0;      // (1/L) sum_j f(l_j) over the finite-L ground state
    double integral = 0.0; // int rho f
    double gap = 0.0;      // sum - integral
};

/// Compare finite-size sums over half-filled ground-state roots with the
/// q = infinity density integral.
inline std::vector<CondensationRow> condensation_check(const std::vector<int>& L_list,
                                                       const std::function<double(double)>& f, int n_nodes = 256)
{
    const RootDensity rho = solve_root_density(infinite_support, n_nodes);
    const double integral = integrate_density(rho, f);
    std::vector<CondensationRow> rows;
    for (int L : L_list) {
        require(L >= 2 && L % 2 == 0, "condensation_check: L must be even");
        const int N = L / 2;
        SolveReport rep = solve_logbae(L, N, ground_state_qnums(L, N));
        require(rep.converged, "condensation_check: Bethe equations did not converge at L = " + std::to_string(L));
        double s = 0.0;
        for (Complex l : rep.roots.values) s += f(l.real());
        s /= L;
        rows.push_back({L, s, integral, s - integral});
    }
    return rows;
}

} // namespace bethe
