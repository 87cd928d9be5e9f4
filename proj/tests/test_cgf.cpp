#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ruinsim/cgf.hpp"

using namespace ruin;

namespace {

// Discounting-factor law used by the run-off reference scenario: constant
// inflation factor e^{0.05} and log(1+r) ~ Normal(0.1, 0.1), with volume
// decaying at rate 0.1. The term sum is 0.05 a^2 - 0.05 a - 0.1, so the
// positive zero is exactly 2 with slope 0.15 (reciprocal 20/3).
CgfExpr reference_runoff_expr() {
    CgfExpr e;
    e.log_moment_of(DistributionSpec{Constant{std::exp(0.05)}});
    e.log_moment_of(DistributionSpec{LogNormal{0.1, 0.1}}, -1.0);
    e.constant(-0.1);
    return e;
}

} // namespace

TEST_CASE("eval and derivative: closed-form quadratic") {
    const CgfExpr e = reference_runoff_expr();
    CHECK(eval(e, 0.0) == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK(eval(e, 1.0) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(eval(e, 2.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(eval(e, 3.0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(eval_derivative(e, 1.0) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(eval_derivative(e, 2.0) == doctest::Approx(0.15).epsilon(1e-12));
    const AlphaDomain d = domain(e);
    CHECK(d.lo == -kInf);
    CHECK(d.hi == kInf);
}

TEST_CASE("reference run-off scenario: rate 2 and slope reciprocal 20/3") {
    const LundbergSolution sol = solve_rate(reference_runoff_expr());
    CHECK(std::fabs(sol.rate - 2.0) < 1e-9);
    CHECK(std::fabs(sol.mu - 20.0 / 3.0) < 1e-9);
    CHECK(sol.derivative == doctest::Approx(0.15).epsilon(1e-10));
    CHECK_FALSE(sol.boundary);
    CHECK(sol.tolerance < 1e-10);
    CHECK(sol.bracket_lo <= sol.rate);
    CHECK(sol.rate <= sol.bracket_hi);
}

TEST_CASE("linear term sum has the exact ratio root") {
    CgfExpr e;
    e.cgf_of(DistributionSpec{Constant{2.0}});
    e.constant(-0.3);
    const LundbergSolution sol = solve_rate(e);
    CHECK(sol.rate == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(sol.derivative == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.mu == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(sol.boundary);
}

TEST_CASE("interior root close to a divergent domain edge") {
    // -log(1 - a) - 10 crosses zero at 1 - e^{-10}, well inside (0, 1) but
    // only 4.5e-5 away from the edge where the term blows up.
    CgfExpr e;
    e.cgf_of(DistributionSpec{Exponential{1.0}});
    e.constant(-10.0);
    const LundbergSolution sol = solve_rate(e);
    CHECK(sol.rate == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-10));
    CHECK(sol.mu == doctest::Approx(std::exp(-10.0)).epsilon(1e-6));
    CHECK(sol.domain_bound == doctest::Approx(1.0));
    CHECK_FALSE(sol.boundary);
}

TEST_CASE("supremum pinned at the domain boundary is flagged") {
    // log E X^{-a} - 50 for X ~ Gamma(2, 1) stays negative until a is within
    // ~e^{-50} of the domain edge at 2; the solver cannot bracket a sign
    // change at double precision and must report the boundary supremum.
    CgfExpr e;
    e.log_moment_of(DistributionSpec{GammaDist{2.0, 1.0}}, -1.0);
    e.constant(-50.0);
    const LundbergSolution sol = solve_rate(e);
    CHECK(sol.boundary);
    CHECK(sol.rate == 2.0);
    CHECK(sol.domain_bound == 2.0);
    CHECK(std::isnan(sol.mu));
}

TEST_CASE("solve_rate error cases") {
    // Positive value at zero violates the precondition.
    {
        CgfExpr e;
        e.constant(0.5);
        CHECK_THROWS_AS(solve_rate(e), std::invalid_argument);
    }
    // Value turns positive immediately right of zero: no positive rate.
    {
        CgfExpr e;
        e.log_moment_of(DistributionSpec{Constant{2.0}});
        CHECK_THROWS_AS(solve_rate(e), NoPositiveRateError);
    }
    // No positive finite domain at all (log-normal MGF diverges for a > 0).
    {
        CgfExpr e;
        e.cgf_of(DistributionSpec{LogNormal{0.0, 1.0}});
        CHECK_THROWS_AS(solve_rate(e), NoPositiveRateError);
    }
    // P X^a decreasing forever: no zero up to the hint.
    {
        CgfExpr e;
        e.log_moment_of(DistributionSpec{Constant{0.5}});
        CHECK_THROWS_AS(solve_rate(e, 1e4), UnboundedRateError);
    }
}

TEST_CASE("extended-real eval and domain intersection") {
    CgfExpr e;
    e.cgf_of(DistributionSpec{Exponential{1.0}});
    CHECK(eval(e, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(eval(e, 1.0) == kInf);
    CHECK(eval(e, 2.0) == kInf);
    CHECK(eval_derivative(e, 0.5) == doctest::Approx(2.0).epsilon(1e-13));

    CgfExpr mix;
    mix.log_moment_of(DistributionSpec{GammaDist{2.0, 1.0}}, -1.0); // a < 2
    mix.cgf_of(DistributionSpec{Exponential{0.5}});                 // a < 2
    mix.log_moment_of(DistributionSpec{LogNormal{0.0, 1.0}});       // all a
    const AlphaDomain d = domain(mix);
    CHECK(d.lo == -kInf);
    CHECK(d.hi == 2.0);
    CHECK_FALSE(d.hi_closed);
    CHECK(eval(mix, 2.5) == kInf);
}

TEST_CASE("coefficient scaling inside terms") {
    // log E X^{2a} for X log-normal(m, v) is 2 m a + 2 v a^2.
    CgfExpr e;
    e.log_moment_of(DistributionSpec{LogNormal{0.3, 0.2}}, 2.0);
    CHECK(eval(e, 1.5) ==
          doctest::Approx(2.0 * 0.3 * 1.5 + 2.0 * 0.2 * 1.5 * 1.5)
              .epsilon(1e-13));
    CHECK(eval_derivative(e, 1.5) ==
          doctest::Approx(2.0 * 0.3 + 4.0 * 0.2 * 1.5).epsilon(1e-13));
    CgfExpr neg;
    neg.cgf_of(DistributionSpec{Constant{3.0}}, -1.0);
    CHECK(eval(neg, 2.0) == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("legendre transform of a quadratic is the dual quadratic") {
    // eval = 0.1 a + 0.2 a^2, so the transform is (x - 0.1)^2 / 0.8.
    CgfExpr e;
    e.log_moment_of(DistributionSpec{LogNormal{0.1, 0.4}});
    CHECK(legendre(e, 0.5) == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(legendre(e, -0.3) == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(legendre(e, 0.1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    // Identity at the solved rate: transform(slope(rho)) = rho*slope - 0.
    const CgfExpr r = reference_runoff_expr();
    CHECK(legendre(r, 0.15) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("legendre transform outside the slope range diverges") {
    // Two-point law at 0.5 / 2.0: slopes live in (-log 2, log 2).
    CgfExpr e;
    e.log_moment_of(
        DistributionSpec{DiscreteWeighted{{0.5, 2.0}, {0.5, 0.5}}});
    CHECK(legendre(e, 1.0) == kInf);
    CHECK(legendre(e, -1.0) == kInf);
    CHECK(legendre(e, 0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // At the closure of the slope range the supremum is -log p(atom) = log 2.
    CHECK(legendre(e, std::log(2.0)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));

    // Degenerate slope: eval = a log 2, transform is 0 at log 2, inf away.
    CgfExpr lin;
    lin.log_moment_of(DistributionSpec{Constant{2.0}});
    CHECK(legendre(lin, std::log(2.0)) == 0.0);
    CHECK(legendre(lin, 1.0) == kInf);
    CHECK(legendre(lin, 0.5) == kInf);
}
