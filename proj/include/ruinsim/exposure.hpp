// Run-off claim intensity built from past business volumes and reporting
// delays: yearly reporting weights b_k from a delay distribution, the
// resulting intensity multipliers xi_n, and single-report probabilities
// (exact mixed-Poisson and the large-n asymptotic form).
#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "ruinsim/distributions.hpp"

namespace ruin {

// Regularly varying prefactor c * x^power (tail refinements and report-rate
// asymptotics are stated up to factors of this shape).
struct RegVaryingFactor {
    double coeff = 1.0;
    double power = 0.0;
    double operator()(double x) const;
};

// Delay law G on [0, inf), G(0) = 0, with tail 1 - G(x) ~ h(x) e^{-x*phi}.
struct GammaDelay {
    double shape;
    double rate; // tail rate phi equals the gamma rate
};
struct TabulatedDelay {
    std::vector<double> x;   // increasing, x.front() == 0
    std::vector<double> cdf; // matches x; cdf.front() == 0, cdf.back() == 1
    double phi;              // declared tail rate
    RegVaryingFactor h;      // declared tail prefactor
};
using DelayModel = std::variant<GammaDelay, TabulatedDelay>;

void validate(const DelayModel& g);
double delay_cdf(const DelayModel& g, double x);
double delay_phi(const DelayModel& g);
RegVaryingFactor delay_h(const DelayModel& g);

// Probability that a claim incurred in some year (occurrence time uniform
// within the year) is reported k full years later, k >= 1:
// b_k = integral_0^1 (G(k+1-s) - G(k-s)) ds, adaptive quadrature, |err|<=1e-12.
double delay_weight(const DelayModel& g, int k);
std::vector<double> delay_weights(const DelayModel& g, int k_max); // b_1..b_kmax

// Past exposure: years -d..0 with volumes pi_m (pi_0 = 1) and iid structure
// variables q_m with mean 1.
struct RunoffExposure {
    int d = 0;
    std::vector<double> pi;  // size d+1, index 0 <-> year -d, back() <-> year 0
    DistributionSpec dist_q;
    DelayModel delay;

    // b_1..b_k cache, filled by ensure_weights; shared so copies reuse it
    std::shared_ptr<const std::vector<double>> weights;
};

void validate(const RunoffExposure& e);
// Make b_1..b_{k_max} available in e.weights (extends as needed).
void ensure_weights(RunoffExposure& e, int k_max);

// xi_n = sum_{m=-d}^0 pi_m b_{n-m} q_m for realized q (q[0] <-> year -d).
double xi_from_exposure(const RunoffExposure& e, int n,
                        const std::vector<double>& q);
double mean_xi(const RunoffExposure& e, int n); // E xi_n (E q = 1)

// Large-n single-report rate: P(K_n = 1) ~ lambda * C * h(n) e^{-n phi} with
// C = (e^phi - 1)(1 - e^{-phi}) sum_m pi_m e^{m phi} / phi.
double asymptotic_report_rate(const RunoffExposure& e, double lambda, int n);
// The same constant as a factor usable in tail formulas: f(x) = C*h(x).
RegVaryingFactor report_rate_factor(const RunoffExposure& e);

// Exact P(K_n = 1) = E[lambda xi_n exp(-lambda xi_n)] via the independence of
// the q_m (Laplace-transform product; quadrature only for log-normal q).
double exact_single_report_prob(const RunoffExposure& e, double lambda, int n);

} // namespace ruin
