#pragma once
// Crude Monte Carlo ruin estimation with truncation-bias accounting, and the
// hybrid estimator that simulates a short initial phase and closes the tail
// with the run-off asymptotic formula evaluated at the surviving capital.
//
// Determinism contract: replication j always uses RNG stream
// cfg.stream_offset + j, and replications are accumulated in fixed-size
// blocks that are reduced in block order, so results are bit-identical for a
// given (seed, stream_offset) regardless of cfg.workers.

#include <cstdint>
#include <vector>

#include "ruinsim/model.hpp"
#include "ruinsim/report.hpp"

namespace ruin {

struct McRuinResult {
    EstimateReport report;
    // First-passage years of the ruined paths, in replication order;
    // filled only when cfg.collect_ruin_times is set.
    std::vector<double> ruin_times;
};

// Fraction of simulated paths that ruin before the policy-determined
// horizon, with a binomial standard error. Run-off models accept
// FixedHorizon or AdaptiveRunoff policies; growth models accept FixedHorizon
// or AdaptiveGrowth. A mismatched policy throws std::invalid_argument.
McRuinResult mc_ruin(const RunoffModelSpec& spec, double u,
                     const McConfig& cfg);
McRuinResult mc_ruin(const GrowthModelSpec& spec, double u,
                     const McConfig& cfg);

// Smallest n0 at which the expected claim intensity has decayed to the
// switch level: lambda * E xi_n <= lambda0 for n0 and every later year.
// Returns 0 when lambda <= lambda0 (no simulation phase needed).
int choose_n0(const RunoffModelSpec& spec, double lambda0);

struct HybridResult {
    EstimateReport report;
    std::uint64_t ruin_count = 0; // paths ruined during the simulated phase
    std::uint64_t clamped = 0;    // tail evaluations clamped into [0,1]
    int n0 = 0;                   // simulated years before the switch
};

// Per replication: simulate to year n0 = choose_n0(spec, lambda0); a ruined
// path scores 1; a surviving path scores the asymptotic tail formula
// evaluated at its capital discounted back to time-0 money, with the claim
// intensity replaced by its realized year-n0 level. The horizon policy in
// cfg is ignored (the simulation phase always runs exactly n0 years).
// Throws HypothesisViolation when the asymptotic regime does not apply.
HybridResult hybrid_ruin(const RunoffModelSpec& spec, double u, double lambda0,
                         const McConfig& cfg);

} // namespace ruin
