// Scalar special functions used by the samplers, CGF evaluators and the
// delay-weight quadrature: normal CDF/quantile, regularized incomplete gamma,
// digamma. All double precision, no tables beyond short rational seeds.
#pragma once

namespace ruin {

double normal_pdf(double x);
double normal_cdf(double x);        // P(N(0,1) <= x)
double normal_sf(double x);         // P(N(0,1) > x), accurate in the far tail
double normal_quantile(double p);   // inverse of normal_cdf on (0,1)

// Regularized incomplete gamma functions, a > 0, x >= 0.
// gamma_p(a,x) = P(a,x) = gamma(a,x)/Gamma(a), gamma_q = 1 - gamma_p.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double digamma(double x);           // d/dx log Gamma(x), x > 0

} // namespace ruin
