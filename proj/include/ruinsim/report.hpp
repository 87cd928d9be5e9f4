#pragma once
// Common result record for every estimator, with a fixed CSV schema and a
// deterministic key-value text rendering, plus the Monte Carlo run
// configuration shared by the simulation estimators.

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ruin {

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    std::string detail; // the numbers behind the verdict
};

struct EstimateReport {
    std::string method; // "mc", "hybrid", "asymptotic-runoff", ...
    double u = 0.0;
    double lambda = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t replications = 0; // 0 for closed-form estimators
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
    int horizon = 0;         // simulated years (0 when not applicable)
    double bias_bound = 0.0; // horizon-truncation bias bound (simulation)
    std::vector<HypothesisCheck> checks;
    std::vector<std::pair<std::string, double>> extras; // rho, mu, beta, ...
};

// Fixed schema: u,lambda,method,estimate,std_error,ci_lo,ci_hi,reps,seed,wall_ms
std::string csv_header();
std::string csv_row(const EstimateReport& r);

// Key-value block, one field per line; byte-identical across reruns (wall
// time is reported only in the CSV).
std::string text_block(const EstimateReport& r);

struct FixedHorizon {
    int years = 1000;
};
struct AdaptiveRunoff {
    // Simulate until the remaining expected claim count per path drops below
    // the floor; the floor then bounds the truncation bias.
    double intensity_floor = 1e-9;
};
struct AdaptiveGrowth {
    // Stop a surviving path once the running discount-growth product falls
    // below floor * min(1, 1/u); a Markov bound on the residual supremum is
    // accumulated into the report's bias field.
    double discount_floor = 1e-8;
};
using HorizonPolicy = std::variant<FixedHorizon, AdaptiveRunoff, AdaptiveGrowth>;

inline constexpr std::uint64_t kDefaultSeed = 123456789ULL;

struct McConfig {
    std::uint64_t replications = 1000000;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t stream_offset = 0; // first RNG stream id (for batching)
    int workers = 1;
    HorizonPolicy horizon = AdaptiveRunoff{};
    bool collect_ruin_times = false;
    // Forces the year-by-year reference kernel even where the exact
    // gap-skipping kernel applies (cross-validation hook).
    bool force_reference_kernel = false;
};

} // namespace ruin
