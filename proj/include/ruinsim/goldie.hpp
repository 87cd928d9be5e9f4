#pragma once
// Stochastic fixed points R =_L Q + M max(0, R) with E M^kappa = 1:
// stationary sampling, tail-constant estimation, and a log-log tail-slope
// diagnostic. The tail of R obeys P(R > u) ~ C u^{-kappa}.

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ruinsim/model.hpp"
#include "ruinsim/rng.hpp"

namespace ruin {

// Thrown when the fixed-point iteration explodes (signals E log M >= 0, so
// no stationary solution exists).
struct DivergenceDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when the tail-constant normalizer m = E(M^kappa log M) is not
// positive, or a sampled M is negative (the machinery needs M >= 0).
struct NonPositiveM : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GoldieProblem {
    // Joint draw of (Q, M); M must be nonnegative almost surely.
    std::function<std::pair<double, double>(RngStream&)> sample_qm;
    double kappa = 1.0; // tail index: E M^kappa = 1
    // E(M^kappa log M); NaN means "estimate by Monte Carlo when needed".
    double m = std::numeric_limits<double>::quiet_NaN();
};

// Fixed-point problem whose solution tail carries the asymptotic ruin
// constant of the growing-volume model:
//   Q = (1+i)(1+g) lambda m_Z (q - (1+s)),   M = (1+i)(1+g)/(1+r).
// kappa solves log E M^kappa = 0; m is set analytically from the
// log-moment derivative at kappa.
GoldieProblem make_growth_goldie(const GrowthModelSpec& spec);

// Stationary samples of R from the Markov chain R <- Q + M max(0, R)
// started at 0: `burn_in` warm-up steps, then one sample every `thin` steps.
std::vector<double> simulate_fixed_point(const GoldieProblem& p,
                                         std::size_t n_samples, RngStream& rng,
                                         std::size_t burn_in = 10000,
                                         std::size_t thin = 10);

struct GoldieConstantEstimate {
    double value = 0.0;     // estimate of C = lim u^kappa P(R > u)
    double std_error = 0.0; // batch-means standard error
    double ci_lo = 0.0;     // 95% confidence bounds
    double ci_hi = 0.0;
    std::size_t samples = 0;
    double kappa = 0.0;
    double m = 0.0; // normalizer actually used (analytic or Monte Carlo)
};

// Estimates C = E(((Q + M R^+)^+)^kappa - ((M R)^+)^kappa) / (kappa m) by
// pairing a fresh (Q, M) draw with each stationary R sample. The normalizer
// m is taken from the problem when supplied, otherwise estimated from 10^6
// fresh draws of M (and then treated as a constant in the standard error).
// Confidence interval by batch means over `batches` contiguous blocks.
GoldieConstantEstimate estimate_goldie_constant(
    const GoldieProblem& p, const std::vector<double>& r_samples,
    RngStream& rng, std::size_t batches = 32);

// Least-squares slope of log empirical survival against log threshold over
// the sample's upper tail; thresholds sit at geometrically spaced survival
// levels in [survival_lo, survival_hi]. A power tail t^{-kappa} yields a
// slope near -kappa.
double tail_slope(std::vector<double> samples, double survival_hi = 0.1,
                  double survival_lo = 1e-3, int points = 12);

} // namespace ruin
