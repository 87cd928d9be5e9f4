#pragma once
// Asymptotic ruin estimators: the closed-form run-off tail with its typical
// ruin time, the fixed-point tail constant for growing volumes, tails of
// randomly stopped sums, and the per-year single-claim decomposition of the
// run-off ruin probability.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ruinsim/exposure.hpp"
#include "ruinsim/goldie.hpp"
#include "ruinsim/model.hpp"
#include "ruinsim/report.hpp"

namespace ruin {

// A named precondition of an asymptotic theorem failed; `check` holds the
// machine-readable name, what() the numbers.
struct HypothesisViolation : std::runtime_error {
    std::string check;
    HypothesisViolation(std::string check_name, const std::string& detail);
};

// ---------------------------------------------------------------------------
// Run-off regime: P(T < inf) ~ prefactor * lambda * f(mu log u) * u^{-rho}.

struct RunoffAsymptotics {
    double rho = 0.0;     // tail exponent (root of the composite rate function)
    double mu = 0.0;      // ruin happens around mu * log u years
    double beta = 0.0;    // moment-domain bound; theorem needs rho in (1, beta)
    double xi_rate = 0.0; // long-run n^{-1} log E xi_n (negative)
    // prefactor = E((1+i)^rho) * E(Z^rho) * e^{xi_rate} * mu / rho
    double prefactor = 0.0;
    RegVaryingFactor f{1.0, 0.0}; // slowly varying part of P(K_n = 1)
    std::vector<HypothesisCheck> checks;
};

// Solves the rate problem and validates every hypothesis; throws
// HypothesisViolation on failure.
RunoffAsymptotics solve_runoff_asymptotics(const RunoffModelSpec& spec);

// Closed-form tail value prefactor * lambda * f(mu log u) * u^{-rho} wrapped
// in a report (clamped to 1 with the raw value kept in extras).
EstimateReport asymptotic_ruin_runoff(const RunoffModelSpec& spec, double u);

struct TypicalRuinTime {
    double center = 0.0; // mu * log u
    double lo = 0.0;     // (mu - epsilon) * log u
    double hi = 0.0;     // (mu + epsilon) * log u
};
TypicalRuinTime typical_ruin_time(const RunoffModelSpec& spec, double u,
                                  double epsilon = 0.0);

// ---------------------------------------------------------------------------
// Growth regime: P(T < inf) ~ C * u^{-rho} with C from the fixed point.

struct GoldieMcConfig {
    std::size_t r_samples = 200000; // stationary R samples
    std::size_t burn_in = 10000;
    std::size_t thin = 10;
    std::size_t batches = 32;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t stream = 0;
};

struct GrowthAsymptotics {
    double rho = 0.0;
    double m = 0.0;    // E(M^rho log M)
    double beta = 0.0; // moment-domain bound; theorem needs rho in (0, beta)
    bool positive_constant = false; // P(q > 1+s) > 0, iff C > 0
    GoldieConstantEstimate constant;
    std::vector<HypothesisCheck> checks;
};

// Validates the growth-theorem hypotheses, solves the tail index, and
// estimates the constant by the paired-difference fixed-point scheme.
GrowthAsymptotics solve_growth_asymptotics(const GrowthModelSpec& spec,
                                           const GoldieMcConfig& cfg = {});

// C * u^{-rho} from a previously solved constant (reusable across a u grid).
EstimateReport asymptotic_ruin_growth(const GrowthAsymptotics& sol, double u,
                                      double lambda);
EstimateReport asymptotic_ruin_growth(const GrowthModelSpec& spec, double u,
                                      const GoldieMcConfig& cfg = {});

// ---------------------------------------------------------------------------
// Tails of randomly stopped sums  S_N + W,  P(N = n) ~ f(n) e^{-n upsilon}.
// Laws of real-valued variables are carried as the law of their exponential,
// so every expectation reduces to a log-moment of a positive variable.

struct CompoundTailProblem {
    DistributionSpec exp_increment; // law of e^eta (one summand is eta)
    DistributionSpec exp_shift;     // law of e^W
    double upsilon = 0.0;           // count decay rate, positive
    RegVaryingFactor f{1.0, 0.0};   // count pmf prefactor
};

struct CompoundTailEstimate {
    double rho = 0.0; // solves log E e^{rho eta} = upsilon
    double mu = 0.0;  // 1 / (d/d alpha log E e^{alpha eta}) at rho
    double crude = 0.0;   // e^{-rho u} (log-scale law only)
    double refined = 0.0; // E(e^{rho W}) * mu / rho * f(mu u) * e^{-rho u}
    std::vector<HypothesisCheck> checks;
};

CompoundTailEstimate compound_tail(const CompoundTailProblem& p, double u);

// ---------------------------------------------------------------------------
// Per-year decomposition of the run-off ruin probability:
//   sum over n of P(A_1...A_{n-1} (1+i) Z > u) * P(K_n = 1).

struct DecompositionTerm {
    int n = 0;
    double tail_factor = 0.0;        // P(A_1...A_{n-1}(1+i) Z > u)
    double single_report_prob = 0.0; // P(K_n = 1), exact
    double value = 0.0;              // product
};

struct DecompositionSeries {
    std::vector<DecompositionTerm> terms; // n = 1..n_max
    double sum = 0.0;
    double truncation_bound = 0.0; // bound on the discarded n > n_max part
    int argmax_n = 0;              // year of the largest term
    bool quadrature_route = false; // true when tail factors were integrable
};

// Tail factors are computed by one-dimensional quadrature when the log
// discount and log inflation are Gaussian or degenerate (then the product is
// lognormal and the claim-size survival integrates exactly); otherwise by
// Monte Carlo with `mc_samples` draws per term.
DecompositionSeries single_claim_decomposition(
    const RunoffModelSpec& spec, double u, int n_max,
    std::uint64_t mc_samples = 200000, std::uint64_t seed = kDefaultSeed);

} // namespace ruin
