#include "ruinsim/estimators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <utility>

#include "ruinsim/cgf.hpp"
#include "ruinsim/quadrature.hpp"
#include "ruinsim/special.hpp"

namespace ruin {

namespace {

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void push_check(std::vector<HypothesisCheck>& checks, std::string name,
                bool passed, std::string detail) {
    checks.push_back({std::move(name), passed, std::move(detail)});
}

// Throws the first failed check as a named violation.
void enforce(const std::vector<HypothesisCheck>& checks) {
    for (const auto& c : checks)
        if (!c.passed) throw HypothesisViolation(c.name, c.detail);
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

// Non-lattice / continuity assessment for the law of a log-product; hard
// failure only when the law is degenerate (then it is trivially lattice).
HypothesisCheck nonlattice_check(std::string name, bool continuous,
                                 bool degenerate) {
    if (continuous) return {std::move(name), true, "continuous component"};
    if (degenerate) return {std::move(name), false, "degenerate law (lattice)"};
    return {std::move(name), true, "assumed for a non-degenerate discrete law"};
}

LundbergSolution solve_or_violate(const CgfExpr& expr,
                                  const std::string& what) {
    try {
        LundbergSolution sol = solve_rate(expr);
        if (sol.boundary)
            throw HypothesisViolation(
                "rate_interior",
                what + ": the rate is a domain-boundary supremum at alpha = " +
                    num(sol.rate) + "; refusing to extrapolate");
        return sol;
    } catch (const NoPositiveRateError& e) {
        throw HypothesisViolation("rate_exists", what + ": " + e.what());
    } catch (const UnboundedRateError& e) {
        throw HypothesisViolation("rate_exists", what + ": " + e.what());
    }
}

} // namespace

HypothesisViolation::HypothesisViolation(std::string check_name,
                                         const std::string& detail)
    : std::runtime_error("hypothesis violation [" + check_name + "]: " +
                         detail),
      check(std::move(check_name)) {}

// ---------------------------------------------------------------------------
// Run-off asymptotics.

RunoffAsymptotics solve_runoff_asymptotics(const RunoffModelSpec& spec) {
    validate(spec);
    RunoffAsymptotics out;
    if (spec.rule != TransitionRule::claims_start_of_year)
        throw HypothesisViolation(
            "transition_rule",
            "the tail asymptotics are derived for the claims-start-of-year "
            "capital rule only");

    out.xi_rate = xi_log_rate(spec);
    push_check(out.checks, "xi_decay",
               std::isfinite(out.xi_rate) && out.xi_rate < 0.0,
               "long-run log E xi rate = " + num(out.xi_rate));
    enforce(out.checks);

    const LundbergSolution sol =
        solve_or_violate(runoff_rate_expr(spec), "run-off rate");
    out.rho = sol.rate;
    out.mu = sol.mu;
    out.beta = moment_domain_bound_runoff(spec);

    push_check(out.checks, "beta_exceeds_one", out.beta > 1.0,
               "beta = " + num(out.beta));
    push_check(out.checks, "rho_in_range",
               out.rho > 1.0 && out.rho < out.beta,
               "rho = " + num(out.rho) + ", beta = " + num(out.beta));
    out.checks.push_back(nonlattice_check("log_discount_nonlattice",
                                          ir_has_continuous_component(spec.ir),
                                          ir_is_degenerate(spec.ir)));
    enforce(out.checks);

    CgfExpr infl;
    append_log_inflation(infl, spec.ir);
    const double log_infl_moment = eval(infl, out.rho);
    const double log_claim_moment = log_moment(spec.claim_size, out.rho);
    push_check(out.checks, "inflation_moment_finite",
               std::isfinite(log_infl_moment),
               "log E (1+i)^rho = " + num(log_infl_moment));
    push_check(out.checks, "claim_moment_finite",
               std::isfinite(log_claim_moment),
               "log E Z^rho = " + num(log_claim_moment));
    enforce(out.checks);

    out.prefactor = std::exp(log_infl_moment + log_claim_moment + out.xi_rate) *
                    out.mu / out.rho;
    out.f = report_factor(spec);
    return out;
}

EstimateReport asymptotic_ruin_runoff(const RunoffModelSpec& spec, double u) {
    if (!(u > 0.0))
        throw std::invalid_argument("asymptotic_ruin_runoff: need u > 0");
    const auto t0 = std::chrono::steady_clock::now();
    const RunoffAsymptotics sol = solve_runoff_asymptotics(spec);

    const double raw = sol.prefactor * spec.lambda *
                       sol.f(sol.mu * std::log(u)) *
                       std::pow(u, -sol.rho);
    EstimateReport r;
    r.method = "asymptotic-runoff";
    r.u = u;
    r.lambda = spec.lambda;
    r.estimate = std::min(1.0, std::max(0.0, raw));
    r.std_error = 0.0;
    r.ci_lo = r.estimate;
    r.ci_hi = r.estimate;
    r.checks = sol.checks;
    r.extras = {{"rho", sol.rho},
                {"mu", sol.mu},
                {"beta", sol.beta},
                {"prefactor", sol.prefactor},
                {"raw_value", raw}};
    // Accuracy caveat: the single-claim picture needs the per-year claim
    // intensity to be small around the typical ruin time.
    const int n_typ =
        std::max(1, static_cast<int>(std::llround(sol.mu * std::log(u))));
    r.extras.emplace_back("lambda_xi_at_typical_time",
                          spec.lambda * mean_xi_at(spec, n_typ));
    r.wall_ms = wall_since(t0);
    return r;
}

TypicalRuinTime typical_ruin_time(const RunoffModelSpec& spec, double u,
                                  double epsilon) {
    if (!(u > 0.0))
        throw std::invalid_argument("typical_ruin_time: need u > 0");
    if (epsilon < 0.0)
        throw std::invalid_argument("typical_ruin_time: need epsilon >= 0");
    const RunoffAsymptotics sol = solve_runoff_asymptotics(spec);
    const double lu = std::max(0.0, std::log(u));
    TypicalRuinTime t;
    t.center = sol.mu * lu;
    t.lo = std::max(0.0, (sol.mu - epsilon) * lu);
    t.hi = (sol.mu + epsilon) * lu;
    return t;
}

// ---------------------------------------------------------------------------
// Growth asymptotics.

GrowthAsymptotics solve_growth_asymptotics(const GrowthModelSpec& spec,
                                           const GoldieMcConfig& cfg) {
    validate(spec);
    GrowthAsymptotics out;
    if (spec.rule != TransitionRule::claims_start_of_year)
        throw HypothesisViolation(
            "transition_rule",
            "the tail asymptotics are derived for the claims-start-of-year "
            "capital rule only");

    const double drift = e_log_growth(spec);
    push_check(out.checks, "growth_drift", drift >= -1e-12,
               "E log(1+g) = " + num(drift));
    push_check(out.checks, "log_volume_discount_continuous",
               log_volume_discount_continuous(spec),
               "law of log((1+i)(1+g)/(1+r)) needs a continuous component");
    enforce(out.checks);

    const LundbergSolution sol =
        solve_or_violate(growth_rate_expr(spec), "growth rate");
    out.rho = sol.rate;
    out.m = sol.derivative;
    out.beta = moment_domain_bound_growth(spec);

    push_check(out.checks, "beta_positive", out.beta > 0.0,
               "beta = " + num(out.beta));
    push_check(out.checks, "rho_in_range",
               out.rho > 0.0 && out.rho < out.beta,
               "rho = " + num(out.rho) + ", beta = " + num(out.beta));
    const double claim_sup = std::min(moment_index(spec.claim_size),
                                      log_moment_domain(spec.claim_size).hi);
    push_check(out.checks, "claim_moment_beyond_one", claim_sup > 1.0,
               "sup{alpha : E Z^alpha < inf} = " + num(claim_sup));
    const double at_rate = eval(growth_rate_expr(spec), out.rho);
    push_check(out.checks, "unit_moment_at_rate", std::fabs(at_rate) <= 1e-8,
               "log E M^rho = " + num(at_rate));
    enforce(out.checks);

    out.positive_constant = profitable_year_possible(spec);

    const GoldieProblem p = make_growth_goldie(spec);
    RngStream rng(cfg.seed, cfg.stream);
    const std::vector<double> samples =
        simulate_fixed_point(p, cfg.r_samples, rng, cfg.burn_in, cfg.thin);
    out.constant = estimate_goldie_constant(p, samples, rng, cfg.batches);
    return out;
}

EstimateReport asymptotic_ruin_growth(const GrowthAsymptotics& sol, double u,
                                      double lambda) {
    if (!(u > 0.0))
        throw std::invalid_argument("asymptotic_ruin_growth: need u > 0");
    const auto t0 = std::chrono::steady_clock::now();
    const double scale = std::pow(u, -sol.rho);
    const double raw = sol.constant.value * scale;
    EstimateReport r;
    r.method = "asymptotic-growth";
    r.u = u;
    r.lambda = lambda;
    r.estimate = std::min(1.0, std::max(0.0, raw));
    r.std_error = sol.constant.std_error * scale;
    r.ci_lo = std::max(0.0, sol.constant.ci_lo * scale);
    r.ci_hi = std::min(1.0, sol.constant.ci_hi * scale);
    r.replications = sol.constant.samples;
    r.checks = sol.checks;
    r.extras = {{"rho", sol.rho},
                {"m_log_moment_slope", sol.m},
                {"beta", sol.beta},
                {"tail_constant", sol.constant.value},
                {"tail_constant_se", sol.constant.std_error},
                {"positive_constant", sol.positive_constant ? 1.0 : 0.0},
                {"raw_value", raw}};
    r.wall_ms = wall_since(t0);
    return r;
}

EstimateReport asymptotic_ruin_growth(const GrowthModelSpec& spec, double u,
                                      const GoldieMcConfig& cfg) {
    const GrowthAsymptotics sol = solve_growth_asymptotics(spec, cfg);
    EstimateReport r = asymptotic_ruin_growth(sol, u, spec.lambda);
    r.seed = cfg.seed;
    return r;
}

// ---------------------------------------------------------------------------
// Tails of randomly stopped sums.

CompoundTailEstimate compound_tail(const CompoundTailProblem& p, double u) {
    validate(p.exp_increment);
    validate(p.exp_shift);
    if (!(p.upsilon > 0.0) || !std::isfinite(p.upsilon))
        throw std::invalid_argument("compound_tail: need upsilon > 0");
    if (!(u > 0.0)) throw std::invalid_argument("compound_tail: need u > 0");

    CompoundTailEstimate out;
    CgfExpr expr;
    expr.log_moment_of(p.exp_increment);
    expr.constant(-p.upsilon);
    const LundbergSolution sol = solve_or_violate(expr, "stopped-sum rate");
    out.rho = sol.rate;
    out.mu = sol.mu;

    const double inc_sup = log_moment_domain(p.exp_increment).hi;
    const double shift_sup = log_moment_domain(p.exp_shift).hi;
    push_check(out.checks, "increment_moment_beyond_rho", inc_sup > out.rho,
               "sup finite alpha = " + num(inc_sup) + ", rho = " +
                   num(out.rho));
    push_check(out.checks, "shift_moment_beyond_rho", shift_sup > out.rho,
               "sup finite alpha = " + num(shift_sup) + ", rho = " +
                   num(out.rho));
    enforce(out.checks);
    // The refined prefactor additionally needs a non-arithmetic increment;
    // the crude log-rate does not, so this check never throws.
    out.checks.push_back(nonlattice_check("increment_nonarithmetic",
                                          is_continuous(p.exp_increment),
                                          is_degenerate(p.exp_increment)));

    out.crude = std::exp(-out.rho * u);
    out.refined = std::exp(log_moment(p.exp_shift, out.rho)) * out.mu /
                  out.rho * p.f(out.mu * u) * out.crude;
    return out;
}

// ---------------------------------------------------------------------------
// Single-claim decomposition.

namespace {

// Gaussian-or-degenerate description of the log of a positive factor.
struct LogGaussian {
    double mean = 0.0;
    double var = 0.0;
    bool ok = false;
};

LogGaussian log_gaussian_of(const DistributionSpec& d) {
    return std::visit(
        overload{
            [](const Constant& c) {
                return LogGaussian{std::log(c.value), 0.0, true};
            },
            [](const LogNormal& l) {
                return LogGaussian{l.mean_log, l.var_log, true};
            },
            [](const auto&) { return LogGaussian{}; },
        },
        DistributionSpec(d));
}

double single_report_prob(const RunoffModelSpec& spec, int n) {
    return std::visit(
        overload{
            [&](const DeterministicExpXi& x) {
                const double nu = spec.lambda * std::exp(-x.phi * n);
                return nu * std::exp(-nu);
            },
            [&](const ReportingDelayXi& x) {
                return exact_single_report_prob(x.exposure, spec.lambda, n);
            },
        },
        spec.xi);
}

double decomposition_truncation_bound(const RunoffModelSpec& spec, int n_max) {
    return std::visit(
        overload{
            [&](const DeterministicExpXi& x) {
                // sum_{n > n_max} lambda e^{-n phi}
                return spec.lambda * std::exp(-(n_max + 1) * x.phi) /
                       (1.0 - std::exp(-x.phi));
            },
            [&](const ReportingDelayXi& x) {
                // sum_{k > K} b_k <= 1 - G(K), so the discarded expected
                // claim count is at most lambda * sum_m pi_m (1 - G(n_max-m)).
                double s = 0.0;
                const auto& e = x.exposure;
                for (int m = -e.d; m <= 0; ++m)
                    s += e.pi[static_cast<std::size_t>(m + e.d)] *
                         (1.0 - delay_cdf(e.delay, n_max - m));
                return spec.lambda * s;
            },
        },
        spec.xi);
}

} // namespace

DecompositionSeries single_claim_decomposition(const RunoffModelSpec& spec,
                                               double u, int n_max,
                                               std::uint64_t mc_samples,
                                               std::uint64_t seed) {
    validate(spec);
    if (!(u > 0.0))
        throw std::invalid_argument("single_claim_decomposition: need u > 0");
    if (n_max < 1)
        throw std::invalid_argument(
            "single_claim_decomposition: need n_max >= 1");
    if (spec.rule != TransitionRule::claims_start_of_year)
        throw HypothesisViolation(
            "transition_rule",
            "the decomposition is derived for the claims-start-of-year rule");
    RunoffModelSpec local = spec;
    prepare(local, n_max);

    DecompositionSeries out;
    out.terms.resize(static_cast<std::size_t>(n_max));

    const auto* ind = std::get_if<IndependentIr>(&local.ir);
    LogGaussian li, lr;
    if (ind) {
        li = log_gaussian_of(ind->inflation_factor);
        lr = log_gaussian_of(ind->return_factor);
    }
    out.quadrature_route = ind && li.ok && lr.ok;

    const double log_u = std::log(u);
    if (out.quadrature_route) {
        const double mean_a = li.mean - lr.mean;
        const double var_a = li.var + lr.var;
        for (int n = 1; n <= n_max; ++n) {
            const double mt = (n - 1) * mean_a + li.mean;
            const double vt = (n - 1) * var_a + li.var;
            double tail;
            if (vt <= 0.0) {
                tail = survival(local.claim_size, u * std::exp(-mt));
            } else {
                const double st = std::sqrt(vt);
                auto integrand = [&](double t) {
                    const double z = u * std::exp(-mt - st * t);
                    if (!std::isfinite(z)) return 0.0;
                    return normal_pdf(t) * survival(local.claim_size, z);
                };
                tail = integrate(integrand, -14.0, 14.0, 1e-16, 1e-10).value;
            }
            auto& term = out.terms[static_cast<std::size_t>(n - 1)];
            term.n = n;
            term.tail_factor = tail;
        }
    } else {
        if (mc_samples == 0)
            throw std::invalid_argument(
                "single_claim_decomposition: Monte Carlo route needs samples");
        // One pass per path: the running log product serves every year, and
        // each year gets a fresh inflation/claim pair for its own indicator.
        std::vector<std::uint64_t> hits(static_cast<std::size_t>(n_max), 0);
        RngStream rng(seed, 0);
        for (std::uint64_t j = 0; j < mc_samples; ++j) {
            double log_s = 0.0;
            for (int n = 1; n <= n_max; ++n) {
                const auto [infl, ret] = sample_ir(local.ir, rng);
                const double z = sample(local.claim_size, rng);
                if (log_s + std::log(infl * z) > log_u)
                    ++hits[static_cast<std::size_t>(n - 1)];
                log_s += std::log(infl / ret);
            }
        }
        for (int n = 1; n <= n_max; ++n) {
            auto& term = out.terms[static_cast<std::size_t>(n - 1)];
            term.n = n;
            term.tail_factor = static_cast<double>(
                                   hits[static_cast<std::size_t>(n - 1)]) /
                               static_cast<double>(mc_samples);
        }
    }

    double best = -1.0;
    for (auto& term : out.terms) {
        term.single_report_prob = single_report_prob(local, term.n);
        term.value = term.tail_factor * term.single_report_prob;
        out.sum += term.value;
        if (term.value > best) {
            best = term.value;
            out.argmax_n = term.n;
        }
    }
    out.truncation_bound = decomposition_truncation_bound(local, n_max);
    return out;
}

} // namespace ruin
