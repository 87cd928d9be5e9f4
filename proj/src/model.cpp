#include "ruinsim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ruin {

namespace {

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

constexpr std::uint64_t kConvolutionShortcutThreshold = 16;

DistributionSpec joint_discount_atoms(const JointDiscreteIr& j) {
    std::vector<double> a(j.probs.size());
    for (std::size_t k = 0; k < j.probs.size(); ++k)
        a[k] = j.inflation_factor[k] / j.return_factor[k];
    return DiscreteWeighted{a, j.probs};
}

DistributionSpec joint_inflation_atoms(const JointDiscreteIr& j) {
    return DiscreteWeighted{j.inflation_factor, j.probs};
}

} // namespace

void validate(const IrLaw& ir) {
    std::visit(
        overload{
            [](const IndependentIr& x) {
                validate(x.inflation_factor);
                validate(x.return_factor);
                if (!has_positive_support(x.inflation_factor) ||
                    !has_positive_support(x.return_factor))
                    throw std::invalid_argument(
                        "IrLaw: inflation and return factors must be positive");
            },
            [](const JointDiscreteIr& x) {
                if (x.probs.empty() ||
                    x.inflation_factor.size() != x.probs.size() ||
                    x.return_factor.size() != x.probs.size())
                    throw std::invalid_argument(
                        "JointDiscreteIr: atom arrays must be non-empty and equal size");
                double total = 0.0;
                for (std::size_t k = 0; k < x.probs.size(); ++k) {
                    if (!(x.probs[k] >= 0.0))
                        throw std::invalid_argument(
                            "JointDiscreteIr: negative probability");
                    if (!(x.inflation_factor[k] > 0.0) ||
                        !(x.return_factor[k] > 0.0))
                        throw std::invalid_argument(
                            "JointDiscreteIr: factors must be positive");
                    total += x.probs[k];
                }
                if (std::fabs(total - 1.0) > 1e-9)
                    throw std::invalid_argument(
                        "JointDiscreteIr: probabilities must sum to 1");
            },
        },
        ir);
}

std::pair<double, double> sample_ir(const IrLaw& ir, RngStream& rng) {
    return std::visit(
        overload{
            [&](const IndependentIr& x) {
                const double infl = sample(x.inflation_factor, rng);
                const double ret = sample(x.return_factor, rng);
                return std::pair<double, double>{infl, ret};
            },
            [&](const JointDiscreteIr& x) {
                const double u = rng.uniform01();
                double cum = 0.0;
                std::size_t k = 0;
                for (; k + 1 < x.probs.size(); ++k) {
                    cum += x.probs[k];
                    if (u <= cum) break;
                }
                return std::pair<double, double>{x.inflation_factor[k],
                                                 x.return_factor[k]};
            },
        },
        ir);
}

void append_log_discount(CgfExpr& expr, const IrLaw& ir) {
    std::visit(overload{
                   [&](const IndependentIr& x) {
                       expr.log_moment_of(x.inflation_factor, 1.0);
                       expr.log_moment_of(x.return_factor, -1.0);
                   },
                   [&](const JointDiscreteIr& x) {
                       expr.log_moment_of(joint_discount_atoms(x), 1.0);
                   },
               },
               ir);
}

void append_log_inflation(CgfExpr& expr, const IrLaw& ir) {
    std::visit(overload{
                   [&](const IndependentIr& x) {
                       expr.log_moment_of(x.inflation_factor, 1.0);
                   },
                   [&](const JointDiscreteIr& x) {
                       expr.log_moment_of(joint_inflation_atoms(x), 1.0);
                   },
               },
               ir);
}

bool ir_has_continuous_component(const IrLaw& ir) {
    return std::visit(overload{
                          [](const IndependentIr& x) {
                              return is_continuous(x.inflation_factor) ||
                                     is_continuous(x.return_factor);
                          },
                          [](const JointDiscreteIr&) { return false; },
                      },
                      ir);
}

bool ir_is_degenerate(const IrLaw& ir) {
    return std::visit(
        overload{
            [](const IndependentIr& x) {
                return is_degenerate(x.inflation_factor) &&
                       is_degenerate(x.return_factor);
            },
            [](const JointDiscreteIr& x) {
                int atoms = 0;
                for (double p : x.probs)
                    if (p > 0.0) ++atoms;
                return atoms <= 1;
            },
        },
        ir);
}

void validate(const GrowthModelSpec& m) {
    if (!(m.lambda > 0.0))
        throw std::invalid_argument("GrowthModelSpec: lambda must be positive");
    if (!(m.safety_loading > -1.0))
        throw std::invalid_argument(
            "GrowthModelSpec: safety loading must exceed -1");
    validate(m.ir);
    validate(m.growth_factor);
    validate(m.structure_q);
    validate(m.claim_size);
    if (!has_positive_support(m.growth_factor))
        throw std::invalid_argument(
            "GrowthModelSpec: growth factor (1+g) must be positive");
    if (!has_positive_support(m.structure_q))
        throw std::invalid_argument("GrowthModelSpec: q must be positive");
    if (!has_positive_support(m.claim_size))
        throw std::invalid_argument(
            "GrowthModelSpec: claim sizes must be positive");
    if (std::fabs(mean(m.structure_q) - 1.0) > 1e-9)
        throw std::invalid_argument("GrowthModelSpec: q must have mean 1");
}

void validate(const RunoffModelSpec& m) {
    if (!(m.lambda > 0.0))
        throw std::invalid_argument("RunoffModelSpec: lambda must be positive");
    validate(m.ir);
    validate(m.claim_size);
    if (!has_positive_support(m.claim_size))
        throw std::invalid_argument(
            "RunoffModelSpec: claim sizes must be positive");
    std::visit(overload{
                   [](const DeterministicExpXi& x) {
                       if (!(x.phi > 0.0))
                           throw std::invalid_argument(
                               "DeterministicExpXi: phi must be positive");
                   },
                   [](const ReportingDelayXi& x) { validate(x.exposure); },
               },
               m.xi);
}

void prepare(RunoffModelSpec& m, int max_year) {
    if (auto* rd = std::get_if<ReportingDelayXi>(&m.xi))
        ensure_weights(rd->exposure, max_year + rd->exposure.d);
}

std::uint64_t sample_claim_count(double lambda, double xi, RngStream& rng) {
    if (!(lambda >= 0.0) || !(xi >= 0.0))
        throw std::invalid_argument("sample_claim_count: negative intensity");
    return rng.poisson(lambda * xi);
}

double sample_claim_total(const DistributionSpec& claim_size,
                          std::uint64_t count, RngStream& rng) {
    if (count == 0) return 0.0;
    if (count >= kConvolutionShortcutThreshold) {
        if (const auto* e = std::get_if<Exponential>(&claim_size))
            return rng.gamma(static_cast<double>(count), 1.0 / e->mean);
        if (const auto* g = std::get_if<GammaDist>(&claim_size))
            return rng.gamma(static_cast<double>(count) * g->shape, g->rate);
    }
    double total = 0.0;
    for (std::uint64_t j = 0; j < count; ++j) total += sample(claim_size, rng);
    return total;
}

PathState init_path(const GrowthModelSpec& m, double initial_capital,
                    RngStream& rng) {
    (void)m;
    (void)rng;
    PathState st;
    st.initial_capital = initial_capital;
    st.capital = initial_capital;
    return st;
}

PathState init_path(const RunoffModelSpec& m, double initial_capital,
                    RngStream& rng) {
    PathState st;
    st.initial_capital = initial_capital;
    st.capital = initial_capital;
    if (const auto* rd = std::get_if<ReportingDelayXi>(&m.xi)) {
        st.q_past.resize(rd->exposure.d + 1);
        for (auto& q : st.q_past) q = sample(rd->exposure.dist_q, rng);
    }
    return st;
}

YearOutcome simulate_year(PathState& st, const GrowthModelSpec& m,
                          RngStream& rng) {
    YearOutcome oc;
    const auto [infl, ret] = sample_ir(m.ir, rng);
    oc.inflation_factor = infl;
    oc.return_factor = ret;
    oc.growth_factor = sample(m.growth_factor, rng);
    oc.q = sample(m.structure_q, rng);

    const double disc_before = st.discount_product;
    st.infl_product *= infl;
    st.growth_product *= oc.growth_factor;
    st.discount_product *= infl / ret;

    oc.xi = st.growth_product * oc.q;
    oc.claim_count = sample_claim_count(m.lambda, oc.xi, rng);
    oc.claim_total = sample_claim_total(m.claim_size, oc.claim_count, rng);
    oc.claim_cost = st.infl_product * oc.claim_total;
    oc.premium = (1.0 + m.safety_loading) * m.lambda * mean(m.claim_size) *
                 st.growth_product * st.infl_product;

    st.year += 1;
    if (m.rule == TransitionRule::claims_start_of_year)
        st.capital = ret * (st.capital + oc.premium - oc.claim_cost);
    else
        st.capital = ret * (st.capital + oc.premium) - oc.claim_cost;

    const double b = oc.claim_total - oc.premium / st.infl_product;
    oc.y_increment = disc_before * infl * b;
    st.y_value += oc.y_increment;
    st.y_running_max = std::max(st.y_running_max, st.y_value);

    if (!st.ruined && st.capital < 0.0) {
        st.ruined = true;
        st.ruin_year = st.year;
    }
    return oc;
}

YearOutcome simulate_year(PathState& st, const RunoffModelSpec& m,
                          RngStream& rng) {
    YearOutcome oc;
    const auto [infl, ret] = sample_ir(m.ir, rng);
    oc.inflation_factor = infl;
    oc.return_factor = ret;

    const double disc_before = st.discount_product;
    st.infl_product *= infl;
    st.discount_product *= infl / ret;

    const int n = st.year + 1;
    oc.xi = std::visit(
        overload{
            [&](const DeterministicExpXi& x) { return std::exp(-x.phi * n); },
            [&](const ReportingDelayXi& x) {
                return xi_from_exposure(x.exposure, n, st.q_past);
            },
        },
        m.xi);
    oc.claim_count = sample_claim_count(m.lambda, oc.xi, rng);
    oc.claim_total = sample_claim_total(m.claim_size, oc.claim_count, rng);
    oc.claim_cost = st.infl_product * oc.claim_total;
    oc.premium = 0.0;

    st.year = n;
    if (m.rule == TransitionRule::claims_start_of_year)
        st.capital = ret * (st.capital - oc.claim_cost);
    else
        st.capital = ret * st.capital - oc.claim_cost;

    oc.y_increment = disc_before * infl * oc.claim_total;
    st.y_value += oc.y_increment;
    st.y_running_max = std::max(st.y_running_max, st.y_value);

    if (!st.ruined && st.capital < 0.0) {
        st.ruined = true;
        st.ruin_year = st.year;
    }
    return oc;
}

namespace {

template <class Spec>
SupremumPath supremum_impl(const Spec& m, double u, int horizon,
                           RngStream& rng) {
    if (m.rule != TransitionRule::claims_start_of_year)
        throw std::invalid_argument(
            "discounted_supremum_path: threshold form requires the "
            "claims_start_of_year rule");
    PathState st = init_path(m, u, rng);
    SupremumPath out;
    for (int n = 1; n <= horizon; ++n) {
        simulate_year(st, m, rng);
        if (st.y_value > out.running_max) out.running_max = st.y_value;
        if (!out.ruined && st.y_value > u) {
            out.ruined = true;
            out.ruin_year = n;
        }
    }
    return out;
}

} // namespace

SupremumPath discounted_supremum_path(const GrowthModelSpec& m, double u,
                                      int horizon, RngStream& rng) {
    return supremum_impl(m, u, horizon, rng);
}

SupremumPath discounted_supremum_path(const RunoffModelSpec& m, double u,
                                      int horizon, RngStream& rng) {
    return supremum_impl(m, u, horizon, rng);
}

CgfExpr log_discount_expr(const IrLaw& ir) {
    CgfExpr e;
    append_log_discount(e, ir);
    return e;
}

CgfExpr growth_rate_expr(const GrowthModelSpec& m) {
    CgfExpr e = log_discount_expr(m.ir);
    e.log_moment_of(m.growth_factor, 1.0);
    return e;
}

double xi_log_rate(const RunoffModelSpec& m) {
    return std::visit(
        overload{
            [](const DeterministicExpXi& x) { return -x.phi; },
            [](const ReportingDelayXi& x) { return -delay_phi(x.exposure.delay); },
        },
        m.xi);
}

CgfExpr runoff_rate_expr(const RunoffModelSpec& m) {
    CgfExpr e = log_discount_expr(m.ir);
    e.constant(xi_log_rate(m));
    return e;
}

RegVaryingFactor report_factor(const RunoffModelSpec& m) {
    return std::visit(
        overload{
            [](const DeterministicExpXi&) { return RegVaryingFactor{1.0, 0.0}; },
            [](const ReportingDelayXi& x) {
                return report_rate_factor(x.exposure);
            },
        },
        m.xi);
}

double mean_xi_at(const RunoffModelSpec& m, int n) {
    return std::visit(
        overload{
            [&](const DeterministicExpXi& x) { return std::exp(-x.phi * n); },
            [&](const ReportingDelayXi& x) { return mean_xi(x.exposure, n); },
        },
        m.xi);
}

double e_log_growth(const GrowthModelSpec& m) {
    return log_moment_derivative(m.growth_factor, 0.0);
}

double moment_domain_bound_growth(const GrowthModelSpec& m) {
    double beta = domain(growth_rate_expr(m)).hi;
    CgfExpr infl;
    append_log_inflation(infl, m.ir);
    beta = std::min(beta, domain(infl).hi);
    beta = std::min(beta, log_moment_domain(m.claim_size).hi);
    beta = std::min(beta, log_moment_domain(m.structure_q).hi);
    beta = std::min(beta, moment_index(m.claim_size));
    return beta;
}

double moment_domain_bound_runoff(const RunoffModelSpec& m) {
    double beta = domain(runoff_rate_expr(m)).hi;
    CgfExpr infl;
    append_log_inflation(infl, m.ir);
    beta = std::min(beta, domain(infl).hi);
    beta = std::min(beta, log_moment_domain(m.claim_size).hi);
    beta = std::min(beta, moment_index(m.claim_size));
    return beta;
}

bool profitable_year_possible(const GrowthModelSpec& m) {
    return support_max(m.structure_q) > 1.0 + m.safety_loading;
}

bool log_volume_discount_continuous(const GrowthModelSpec& m) {
    return ir_has_continuous_component(m.ir) || is_continuous(m.growth_factor);
}

bool log_discount_continuous(const RunoffModelSpec& m) {
    return ir_has_continuous_component(m.ir);
}

} // namespace ruin
