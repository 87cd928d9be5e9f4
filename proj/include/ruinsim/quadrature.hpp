// Adaptive numerical integration on finite intervals: 15-point Gauss-Legendre
// panels with bisection-based error control. Nodes are computed at first use
// (Newton on the Legendre recurrence), so there are no hard-coded node tables.
#pragma once

#include <functional>

namespace ruin {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = true;
};

// Integrates f over [a, b] until the panel-refinement discrepancy is below
// max(abs_tol, rel_tol * |integral|). Throws std::invalid_argument on a > b.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-12,
                           double rel_tol = 1e-12);

} // namespace ruin
