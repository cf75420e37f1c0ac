#pragma once

#include <cmath>
#include <functional>

#include "core.hpp"

namespace bethe {

struct NewtonOptions {
    double tolerance = 1e-12;
    int max_iterations = 200;
    int max_halvings = 30;
};

struct NewtonResult {
    RVector x;
    double residual = 0.0; // max-norm of F at x
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton iteration for F(x) = 0 with an analytic Jacobian. A step is
/// halved while it does not decrease the max-norm of the residual.
/// `F(x, f)` fills f; `J(x, jac)` fills the Jacobian.
inline NewtonResult newton_solve(const std::function<void(const RVector&, RVector&)>& F,
                                 const std::function<void(const RVector&, RMatrix&)>& J,
                                 RVector x0, const NewtonOptions& opt = {})
{
    NewtonResult res;
    const Eigen::Index n = x0.size();
    res.x = std::move(x0);
    RVector f(n), f_trial(n);
    RMatrix jac(n, n);
    if (n == 0) {
        res.converged = true;
        return res;
    }

    F(res.x, f);
    double r = f.cwiseAbs().maxCoeff();
    for (int it = 0; it < opt.max_iterations && std::isfinite(r); ++it) {
        if (r < opt.tolerance) break;
        J(res.x, jac);
        RVector step = jac.fullPivLu().solve(f);
        if (!step.allFinite()) break;

        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
            RVector trial = res.x - t * step;
            F(trial, f_trial);
            const double rt = f_trial.cwiseAbs().maxCoeff();
            if (std::isfinite(rt) && rt < r) {
                res.x = std::move(trial);
                f = f_trial;
                r = rt;
                accepted = true;
                break;
            }
        }
        res.iterations = it + 1;
        if (!accepted) break; // stagnated: no descent direction at roundoff level
    }
    res.residual = r;
    res.converged = std::isfinite(r) && r < opt.tolerance;
    return res;
}

} // namespace bethe
