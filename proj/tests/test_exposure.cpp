#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ruinsim/exposure.hpp"

using namespace ruin;

namespace {

DelayModel uniform_delay() {
    // Delay uniform on [0, 1]: every claim is reported in its own year or the
    // next one, never later.
    return TabulatedDelay{{0.0, 1.0}, {0.0, 1.0}, 1.0, RegVaryingFactor{1.0, 0.0}};
}

DelayModel gamma_delay() { return GammaDelay{2.0, 0.1}; }

// d = 2 with volumes 0.7, 1.1, 1 (oldest first) and structure noise
// q ~ Gamma(2, 2), mean 1.
RunoffExposure reference_exposure(int n_max) {
    RunoffExposure e;
    e.d = 2;
    e.pi = {0.7, 1.1, 1.0};
    e.dist_q = DistributionSpec{GammaDist{2.0, 2.0}};
    e.delay = gamma_delay();
    validate(e);
    ensure_weights(e, n_max + e.d);
    return e;
}

} // namespace

TEST_CASE("regularly varying factor evaluates c * x^p") {
    CHECK(RegVaryingFactor{2.0, 0.5}(4.0) == doctest::Approx(4.0));
    CHECK(RegVaryingFactor{3.0, 0.0}(7.0) == doctest::Approx(3.0));
    CHECK(RegVaryingFactor{1.5, -1.0}(2.0) == doctest::Approx(0.75));
}

TEST_CASE("delay model validation") {
    CHECK_THROWS_AS(validate(DelayModel{GammaDelay{0.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(DelayModel{GammaDelay{2.0, -0.1}}),
                    std::invalid_argument);
    // must start at (0, 0)
    CHECK_THROWS_AS(
        validate(DelayModel{TabulatedDelay{
            {0.5, 1.0}, {0.0, 1.0}, 1.0, RegVaryingFactor{1.0, 0.0}}}),
        std::invalid_argument);
    // cdf must reach 1
    CHECK_THROWS_AS(
        validate(DelayModel{TabulatedDelay{
            {0.0, 1.0}, {0.0, 0.9}, 1.0, RegVaryingFactor{1.0, 0.0}}}),
        std::invalid_argument);
    // knots must be monotone
    CHECK_THROWS_AS(
        validate(DelayModel{TabulatedDelay{{0.0, 2.0, 1.0},
                                           {0.0, 0.5, 1.0},
                                           1.0,
                                           RegVaryingFactor{1.0, 0.0}}}),
        std::invalid_argument);
    CHECK_NOTHROW(validate(uniform_delay()));
    CHECK_NOTHROW(validate(gamma_delay()));
}

TEST_CASE("delay cdf: gamma closed form and table interpolation") {
    // Gamma(2, 0.1) cdf at x = 10: 1 - e^{-1}(1 + 1).
    CHECK(delay_cdf(gamma_delay(), 10.0) ==
          doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(delay_cdf(gamma_delay(), 0.0) == 0.0);
    CHECK(delay_cdf(gamma_delay(), -1.0) == 0.0);

    const DelayModel t{TabulatedDelay{
        {0.0, 1.0, 3.0}, {0.0, 0.5, 1.0}, 1.0, RegVaryingFactor{1.0, 0.0}}};
    CHECK(delay_cdf(t, 0.5) == doctest::Approx(0.25));
    CHECK(delay_cdf(t, 2.0) == doctest::Approx(0.75));
    CHECK(delay_cdf(t, 5.0) == 1.0);
}

TEST_CASE("delay tail parameters") {
    CHECK(delay_phi(gamma_delay()) == 0.1);
    const RegVaryingFactor h = delay_h(gamma_delay());
    // 1 - G(x) ~ (0.1 x) e^{-0.1 x} for a shape-2 gamma delay.
    CHECK(h.coeff == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(h.power == doctest::Approx(1.0));
    CHECK(delay_phi(uniform_delay()) == 1.0);
}

TEST_CASE("reporting weights: uniform delay has b1 = 1/2 and nothing later") {
    const DelayModel u = uniform_delay();
    CHECK(delay_weight(u, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::fabs(delay_weight(u, 2)) <= 1e-12);
    CHECK(std::fabs(delay_weight(u, 5)) <= 1e-12);
    CHECK_THROWS_AS(delay_weight(u, 0), std::invalid_argument);
}

TEST_CASE("reporting weights: gamma delay against frozen quadrature values") {
    const DelayModel g = gamma_delay();
    CHECK(delay_weight(g, 1) ==
          doctest::Approx(0.008905010205298821).epsilon(1e-10));
    CHECK(delay_weight(g, 2) ==
          doctest::Approx(0.016251719003460174).epsilon(1e-10));
    CHECK(delay_weight(g, 5) ==
          doctest::Approx(0.03025065766835928).epsilon(1e-10));
    CHECK(delay_weight(g, 10) ==
          doctest::Approx(0.0367572568313011).epsilon(1e-10));
    CHECK(delay_weight(g, 100) ==
          doctest::Approx(4.5430203949860266e-05).epsilon(1e-8));

    const std::vector<double> w = delay_weights(g, 10);
    REQUIRE(w.size() == 10);
    for (int k = 1; k <= 10; ++k)
        CHECK(w[k - 1] == doctest::Approx(delay_weight(g, k)).epsilon(1e-13));
}

TEST_CASE("weights sum to 1 minus the same-year report mass") {
    // sum_{k>=1} b_k telescopes to 1 - int_0^1 G(u) du.
    const DelayModel g = gamma_delay();
    const std::vector<double> w = delay_weights(g, 400);
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(sum == doctest::Approx(0.9984142212448489).epsilon(1e-9));
}

TEST_CASE("exposure validation") {
    RunoffExposure e;
    e.d = 1;
    e.pi = {0.5, 1.0};
    e.dist_q = DistributionSpec{GammaDist{2.0, 2.0}};
    e.delay = gamma_delay();
    CHECK_NOTHROW(validate(e));

    RunoffExposure bad = e;
    bad.pi = {0.5};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument); // size != d+1
    bad = e;
    bad.pi = {0.5, 0.9};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument); // current volume != 1
    bad = e;
    bad.pi = {-0.5, 1.0};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument); // negative volume
    bad = e;
    bad.dist_q = DistributionSpec{Exponential{2.0}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument); // mean(q) != 1
    bad = e;
    bad.dist_q = DistributionSpec{Constant{-1.0}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument); // q not positive
}

TEST_CASE("weight cache extends and is shared") {
    RunoffExposure e = reference_exposure(10);
    const auto before = e.weights;
    ensure_weights(e, 5); // already long enough: no reallocation
    CHECK(e.weights == before);
    ensure_weights(e, 40);
    REQUIRE(static_cast<int>(e.weights->size()) >= 40);
    CHECK((*e.weights)[39] ==
          doctest::Approx(delay_weight(e.delay, 40)).epsilon(1e-13));
    // copies share the cache
    RunoffExposure copy = e;
    CHECK(copy.weights == e.weights);
}

TEST_CASE("intensity multipliers: linear in q and matching frozen means") {
    RunoffExposure e = reference_exposure(200);

    // xi_n at q = 1 equals its mean.
    const std::vector<double> ones{1.0, 1.0, 1.0};
    CHECK(xi_from_exposure(e, 10, ones) ==
          doctest::Approx(mean_xi(e, 10)).epsilon(1e-13));

    // Hand-assembled combination: volumes are oldest-first, so year -2 pairs
    // with weight b_{n+2}.
    const std::vector<double> q{2.0, 0.0, 1.0};
    const double expect = 0.7 * delay_weight(e.delay, 12) * 2.0 +
                          1.0 * delay_weight(e.delay, 10) * 1.0;
    CHECK(xi_from_exposure(e, 10, q) == doctest::Approx(expect).epsilon(1e-12));

    CHECK(mean_xi(e, 10) ==
          doctest::Approx(0.10229340825674949).epsilon(1e-10));
    CHECK(mean_xi(e, 50) ==
          doctest::Approx(0.008801725030269329).epsilon(1e-10));
    CHECK(mean_xi(e, 100) ==
          doctest::Approx(0.00011765749085716637).epsilon(1e-9));
    CHECK(mean_xi(e, 200) ==
          doctest::Approx(1.0639989225940011e-08).epsilon(1e-7));

    CHECK_THROWS_AS(xi_from_exposure(e, 10, std::vector<double>{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(xi_from_exposure(e, 0, ones), std::invalid_argument);
}

TEST_CASE("exact single-report probability against frozen values") {
    RunoffExposure e = reference_exposure(200);
    CHECK(exact_single_report_prob(e, 1.0, 50) ==
          doctest::Approx(0.008711239851046453).epsilon(1e-10));
    CHECK(exact_single_report_prob(e, 1.0, 100) ==
          doctest::Approx(0.00011764122139776509).epsilon(1e-9));
    CHECK(exact_single_report_prob(e, 1.0, 200) ==
          doctest::Approx(1.0639989092855468e-08).epsilon(1e-7));
    CHECK_THROWS_AS(exact_single_report_prob(e, -1.0, 50),
                    std::invalid_argument);
}

TEST_CASE("asymptotic report rate approaches the exact probability") {
    RunoffExposure e = reference_exposure(200);

    // Internal consistency with the published factor.
    const RegVaryingFactor f = report_rate_factor(e);
    CHECK(f.power == doctest::Approx(1.0));
    for (int n : {50, 100}) {
        CHECK(asymptotic_report_rate(e, 1.0, n) ==
              doctest::Approx(f(n) * std::exp(-0.1 * n)).epsilon(1e-12));
    }

    // Approximation quality improves along n (bands include 2x headroom over
    // the observed errors of 0.6% / 0.8% / 0.4%).
    const double r50 = exact_single_report_prob(e, 1.0, 50) /
                       asymptotic_report_rate(e, 1.0, 50);
    const double r100 = exact_single_report_prob(e, 1.0, 100) /
                        asymptotic_report_rate(e, 1.0, 100);
    const double r200 = exact_single_report_prob(e, 1.0, 200) /
                        asymptotic_report_rate(e, 1.0, 200);
    CHECK(std::fabs(r50 - 1.0) < 0.02);
    CHECK(std::fabs(r100 - 1.0) < 0.02);
    CHECK(std::fabs(r200 - 1.0) < 0.01);

    // Scales linearly in the base intensity.
    CHECK(asymptotic_report_rate(e, 3.0, 50) ==
          doctest::Approx(3.0 * asymptotic_report_rate(e, 1.0, 50))
              .epsilon(1e-13));
}
