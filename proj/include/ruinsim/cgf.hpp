// Symbolic sums of cumulant-type terms and the machinery built on them:
// extended-real evaluation, adjustment-rate solving (the positive zero /
// domain supremum of a convex term sum), and the Legendre transform.
#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "ruinsim/distributions.hpp"

namespace ruin {

// Contributes log E X^(coeff * alpha). coeff = -1 expresses reciprocal
// factors such as 1/(1+r) inside products.
struct LogMomentTerm {
    DistributionSpec dist;
    double coeff = 1.0;
};

// Contributes log E exp(coeff * alpha * X).
struct CgfTerm {
    DistributionSpec dist;
    double coeff = 1.0;
};

// Contributes an alpha-independent offset (e.g. a long-run volume decay rate).
struct ConstantTerm {
    double value = 0.0;
};

using CgfTermVariant = std::variant<LogMomentTerm, CgfTerm, ConstantTerm>;

struct CgfExpr {
    std::vector<CgfTermVariant> terms;

    CgfExpr& log_moment_of(DistributionSpec d, double coeff = 1.0);
    CgfExpr& cgf_of(DistributionSpec d, double coeff = 1.0);
    CgfExpr& constant(double v);
};

// Extended-real value of the term sum; +inf outside the finite domain.
double eval(const CgfExpr& e, double alpha);
// Analytic derivative (per-family closed forms); throws std::domain_error
// outside the finite domain.
double eval_derivative(const CgfExpr& e, double alpha);
// Intersection of the per-term finiteness domains.
AlphaDomain domain(const CgfExpr& e);

// No alpha > 0 with eval(alpha) <= 0 exists (value turns positive immediately
// right of zero).
struct NoPositiveRateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// eval stays <= 0 all the way to alpha_max_hint with an unbounded domain.
struct UnboundedRateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LundbergSolution {
    double rate = 0.0;          // sup{alpha >= 0 : eval(alpha) <= 0}
    double derivative = 0.0;    // slope at the rate (interior zeros only)
    double mu = 0.0;            // 1 / derivative
    double domain_bound = 0.0;  // beta: sup of the positive finite domain
    bool boundary = false;      // true if the sup sits at the domain boundary
    double bracket_lo = 0.0;    // final root bracket (interior case)
    double bracket_hi = 0.0;
    double tolerance = 0.0;     // achieved bracket width
};

// Geometric bracket expansion from 1e-6, bisection, Newton polish.
// Preconditions: eval(0) <= 0 and finiteness on some (0, eps).
LundbergSolution solve_rate(const CgfExpr& e, double alpha_max_hint = 1e6);

// sup over the full finite domain of (alpha * x - eval(alpha)); +inf when the
// supremum diverges (x outside the closure of the derivative range).
double legendre(const CgfExpr& e, double x);

} // namespace ruin
