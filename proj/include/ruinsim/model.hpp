// Yearly capital dynamics for an insurer under inflation, investment returns
// and drifting business volume. Two regimes share the same machinery:
//   * growth: volume drifts by iid factors (1+g) with structure noise q and
//     premiums collected with a safety loading;
//   * run-off: no premiums, claim intensity decays (deterministically or via
//     past-exposure reporting delays).
// Each simulated year advances two algebraically different recursions from
// the same draws: the capital recursion U_n and the discounted-claims sum Y_n
// whose first passage over the initial capital is the ruin time.
#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "ruinsim/cgf.hpp"
#include "ruinsim/distributions.hpp"
#include "ruinsim/exposure.hpp"

namespace ruin {

enum class TransitionRule {
    claims_start_of_year, // U_n = (1+r_n)(U_{n-1} + P_n - X_n)
    claims_end_of_year,   // U_n = (1+r_n)(U_{n-1} + P_n) - X_n
};

// Law of the yearly pair (1+i, 1+r); dependence within the pair is allowed
// through an explicit joint discrete law.
struct IndependentIr {
    DistributionSpec inflation_factor; // law of 1+i
    DistributionSpec return_factor;    // law of 1+r
};
struct JointDiscreteIr {
    std::vector<double> inflation_factor; // atom coordinates of 1+i
    std::vector<double> return_factor;    // atom coordinates of 1+r
    std::vector<double> probs;
};
using IrLaw = std::variant<IndependentIr, JointDiscreteIr>;

void validate(const IrLaw& ir);
std::pair<double, double> sample_ir(const IrLaw& ir, RngStream& rng);
// Appends terms for log E A^alpha, A = (1+i)/(1+r), to expr.
void append_log_discount(CgfExpr& expr, const IrLaw& ir);
// Appends terms for log E (1+i)^alpha to expr.
void append_log_inflation(CgfExpr& expr, const IrLaw& ir);
bool ir_has_continuous_component(const IrLaw& ir);
bool ir_is_degenerate(const IrLaw& ir);

struct DeterministicExpXi {
    double phi; // xi_n = e^{-n phi}
};
struct ReportingDelayXi {
    RunoffExposure exposure;
};
using XiModel = std::variant<DeterministicExpXi, ReportingDelayXi>;

struct GrowthModelSpec {
    double lambda = 1.0;         // claim frequency scale
    double safety_loading = 0.0; // premium loading s
    IrLaw ir;
    DistributionSpec growth_factor; // law of 1+g
    DistributionSpec structure_q;   // law of q, E q = 1
    DistributionSpec claim_size;    // law of Z
    TransitionRule rule = TransitionRule::claims_start_of_year;
};

struct RunoffModelSpec {
    double lambda = 1.0;
    IrLaw ir;
    DistributionSpec claim_size;
    XiModel xi = DeterministicExpXi{0.1};
    TransitionRule rule = TransitionRule::claims_start_of_year;
};

void validate(const GrowthModelSpec& m);
void validate(const RunoffModelSpec& m);
// Fills caches needed to simulate up to max_year (reporting-delay weights).
void prepare(RunoffModelSpec& m, int max_year);

// Poisson claim count at intensity lambda * xi.
std::uint64_t sample_claim_count(double lambda, double xi, RngStream& rng);

// Sum of `count` claim sizes. Uses the exact convolution shortcut (one gamma
// draw) for large counts of exponential/gamma claims.
double sample_claim_total(const DistributionSpec& claim_size,
                          std::uint64_t count, RngStream& rng);

struct PathState {
    int year = 0;
    double initial_capital = 0.0;
    double capital = 0.0;         // U_n
    double infl_product = 1.0;    // prod (1+i_k), k <= n
    double growth_product = 1.0;  // prod (1+g_k), k <= n (growth regime)
    double discount_product = 1.0;// prod A_k, k <= n
    double y_value = 0.0;         // Y_n
    double y_running_max = 0.0;
    bool ruined = false;          // first year with U_n < 0 seen
    int ruin_year = -1;
    std::vector<double> q_past;   // realized q_{-d..0} (reporting-delay xi)
};

PathState init_path(const GrowthModelSpec& m, double initial_capital,
                    RngStream& rng);
PathState init_path(const RunoffModelSpec& m, double initial_capital,
                    RngStream& rng);

struct YearOutcome {
    double inflation_factor = 1.0; // 1+i_n
    double return_factor = 1.0;    // 1+r_n
    double growth_factor = 1.0;    // 1+g_n
    double q = 1.0;
    double xi = 0.0;               // intensity multiplier of the year
    std::uint64_t claim_count = 0;
    double claim_total = 0.0;      // V_n (time-0 money)
    double claim_cost = 0.0;       // X_n = prod(1+i) * V_n
    double premium = 0.0;          // P_n
    double y_increment = 0.0;
};

// Advances one year. Draw order is fixed: (1+i, 1+r), then (1+g, q) in the
// growth regime, then the claim count, then claim sizes. Point-mass inputs
// consume no randomness.
YearOutcome simulate_year(PathState& st, const GrowthModelSpec& m,
                          RngStream& rng);
YearOutcome simulate_year(PathState& st, const RunoffModelSpec& m,
                          RngStream& rng);

struct SupremumPath {
    double running_max = 0.0; // max_n Y_n over the horizon
    bool ruined = false;      // running_max exceeded the initial capital
    int ruin_year = -1;
};

// Threshold form of ruin: tracks Y_n and its first passage above the initial
// capital. Only defined for the claims_start_of_year rule (the identity
// U_n < 0 <=> Y_n > u requires it); throws std::invalid_argument otherwise.
SupremumPath discounted_supremum_path(const GrowthModelSpec& m, double u,
                                      int horizon, RngStream& rng);
SupremumPath discounted_supremum_path(const RunoffModelSpec& m, double u,
                                      int horizon, RngStream& rng);

// --- model-level analytic helpers --------------------------------------
CgfExpr log_discount_expr(const IrLaw& ir);            // Lambda_A
CgfExpr growth_rate_expr(const GrowthModelSpec& m);    // Lambda_A + Lambda_g
CgfExpr runoff_rate_expr(const RunoffModelSpec& m);    // Lambda_A + xi decay
double xi_log_rate(const RunoffModelSpec& m);          // long-run n^-1 log E xi_n
RegVaryingFactor report_factor(const RunoffModelSpec& m); // P(K_n=1) prefactor f
double mean_xi_at(const RunoffModelSpec& m, int n);    // E xi_n
double e_log_growth(const GrowthModelSpec& m);         // E log(1+g)
double moment_domain_bound_growth(const GrowthModelSpec& m); // beta (growth)
double moment_domain_bound_runoff(const RunoffModelSpec& m); // beta (run-off)
bool profitable_year_possible(const GrowthModelSpec& m);     // P(q > 1+s) > 0
bool log_volume_discount_continuous(const GrowthModelSpec& m); // law of log D
bool log_discount_continuous(const RunoffModelSpec& m);        // law of log A

} // namespace ruin
