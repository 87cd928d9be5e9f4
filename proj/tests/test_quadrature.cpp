#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ruinsim/quadrature.hpp"

using namespace ruin;

TEST_CASE("polynomials are integrated to machine precision") {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(r.converged);

    r = integrate([](double x) { return 7.0 * x * x * x - 2.0 * x + 1.0; },
                  -2.0, 3.0);
    // antiderivative: 7x^4/4 - x^2 + x
    const double ref = (7.0 * 81.0 / 4.0 - 9.0 + 3.0) -
                       (7.0 * 16.0 / 4.0 - 4.0 - 2.0);
    CHECK(r.value == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("gaussian integral") {
    auto r = integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0,
                       1e-14, 1e-14);
    CHECK(r.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("oscillatory integrand") {
    auto r = integrate([](double x) { return std::sin(x); }, 0.0, 20.0, 1e-13,
                       1e-13);
    CHECK(r.value == doctest::Approx(1.0 - std::cos(20.0)).epsilon(1e-11));
}

TEST_CASE("peaked integrand needs refinement but converges") {
    // A narrow bump at 0.37 of width 1e-3.
    const double c = 0.37, w = 1e-3;
    auto f = [&](double x) {
        const double t = (x - c) / w;
        return std::exp(-t * t);
    };
    auto r = integrate(f, 0.0, 1.0, 1e-14, 1e-12);
    CHECK(r.value == doctest::Approx(w * std::sqrt(M_PI)).epsilon(1e-10));
    CHECK(r.panels > 4);
    CHECK(r.converged);
}

TEST_CASE("degenerate and invalid intervals") {
    auto r = integrate([](double x) { return x; }, 2.0, 2.0);
    CHECK(r.value == 0.0);
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("error estimate brackets the true error") {
    auto r = integrate([](double x) { return std::exp(x); }, 0.0, 2.0, 1e-13,
                       1e-13);
    const double ref = std::exp(2.0) - 1.0;
    CHECK(std::fabs(r.value - ref) <= std::max(1e-12, 10.0 * r.error_estimate));
}
