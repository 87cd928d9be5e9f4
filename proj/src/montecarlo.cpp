#include "ruinsim/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <variant>

#include "ruinsim/estimators.hpp"
#include "ruinsim/special.hpp"

namespace ruin {

namespace {

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

// Replications are accumulated in fixed-size blocks reduced in block order,
// which makes every reported number independent of the worker count.
constexpr std::uint64_t kBlockSize = 4096;
constexpr long long kNoClaim = std::numeric_limits<long long>::max();
constexpr long long kGrowthYearCap = 2000000;
constexpr int kScanCap = 500000;

struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

struct BlockSlot {
    std::uint64_t ruins = 0;
    std::uint64_t clamped = 0;
    double sum = 0.0;  // hybrid: sum of per-path scores
    double sum2 = 0.0; // hybrid: sum of squared scores
    double bias = 0.0; // truncation-bias bound accumulated over the block
    long long max_year = 0;
    std::vector<double> times;
};

// Runs fn(first_rep, last_rep, slot) over every block; workers take
// contiguous block ranges and write only their own slots.
template <class BlockFn>
void run_partitioned(std::uint64_t reps, int workers,
                     std::vector<BlockSlot>& slots, const BlockFn& fn) {
    const std::uint64_t nb = (reps + kBlockSize - 1) / kBlockSize;
    slots.assign(nb, BlockSlot{});
    auto run_range = [&](std::uint64_t b0, std::uint64_t b1) {
        for (std::uint64_t b = b0; b < b1; ++b) {
            const std::uint64_t lo = b * kBlockSize;
            const std::uint64_t hi = std::min(reps, lo + kBlockSize);
            fn(lo, hi, slots[b]);
        }
    };
    const std::uint64_t w =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), nb);
    if (w <= 1) {
        run_range(0, nb);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    const std::uint64_t per = (nb + w - 1) / w;
    for (std::uint64_t i = 0; i < w; ++i) {
        const std::uint64_t b0 = i * per;
        const std::uint64_t b1 = std::min(nb, b0 + per);
        if (b0 >= b1) break;
        pool.emplace_back([&, b0, b1] { run_range(b0, b1); });
    }
    for (auto& t : pool) t.join();
}

struct Totals {
    std::uint64_t ruins = 0;
    std::uint64_t clamped = 0;
    double sum = 0.0;
    double sum2 = 0.0;
    double bias = 0.0;
    long long max_year = 0;
    std::vector<double> times;
};

Totals reduce(std::vector<BlockSlot>& slots, bool collect_times) {
    Totals t;
    Kahan sum, sum2, bias;
    for (auto& s : slots) {
        t.ruins += s.ruins;
        t.clamped += s.clamped;
        sum.add(s.sum);
        sum2.add(s.sum2);
        bias.add(s.bias);
        t.max_year = std::max(t.max_year, s.max_year);
        if (collect_times)
            t.times.insert(t.times.end(), s.times.begin(), s.times.end());
    }
    t.sum = sum.s;
    t.sum2 = sum2.s;
    t.bias = bias.s;
    return t;
}

void check_cfg(const McConfig& cfg) {
    if (cfg.replications < 1)
        throw std::invalid_argument("mc config: need replications >= 1");
    if (cfg.workers < 1)
        throw std::invalid_argument("mc config: need workers >= 1");
    std::visit(overload{
                   [](const FixedHorizon& h) {
                       if (h.years < 1)
                           throw std::invalid_argument(
                               "mc config: fixed horizon needs years >= 1");
                   },
                   [](const AdaptiveRunoff& h) {
                       if (!(h.intensity_floor > 0.0) ||
                           !(h.intensity_floor < 1.0))
                           throw std::invalid_argument(
                               "mc config: intensity floor must be in (0,1)");
                   },
                   [](const AdaptiveGrowth& h) {
                       if (!(h.discount_floor > 0.0) ||
                           !(h.discount_floor < 1.0))
                           throw std::invalid_argument(
                               "mc config: discount floor must be in (0,1)");
                   },
               },
               cfg.horizon);
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

double binomial_report_fields(EstimateReport& r, std::uint64_t ruins,
                              std::uint64_t reps) {
    const double p =
        static_cast<double>(ruins) / static_cast<double>(reps);
    const double se = std::sqrt(std::max(0.0, p * (1.0 - p)) /
                                static_cast<double>(reps));
    const double z = normal_quantile(0.975);
    r.estimate = p;
    r.std_error = se;
    r.ci_lo = std::max(0.0, p - z * se);
    r.ci_hi = std::min(1.0, p + z * se);
    return p;
}

// --- expected-remaining-claim-count bounds (run-off) ---------------------

// Expected number of claims in years >= n for the deterministic intensity.
double det_resid(double lambda, double phi, long long n) {
    return lambda * std::exp(-phi * static_cast<double>(n)) /
           (1.0 - std::exp(-phi));
}

// Expected number of claims in years >= n given the realized past volumes.
double exposure_resid(const RunoffExposure& e, const std::vector<double>& q,
                      double lambda, long long n) {
    double s = 0.0;
    for (int j = 0; j <= e.d; ++j) {
        const int m = j - e.d;
        s += e.pi[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)] *
             (1.0 - delay_cdf(e.delay, static_cast<double>(n - 1 - m)));
    }
    return lambda * s;
}

// Year cap for adaptive reporting-delay paths; also how far the delay
// weights must be precomputed. Uses a generous volume allowance so only
// pathologically large realized q values ever hit the cap (those paths then
// contribute their honest residual bound to the bias field).
int exposure_prep_cap(const RunoffExposure& e, double lambda, double floor) {
    double sum_pi = 0.0;
    for (double p : e.pi) sum_pi += p;
    const double allowance = 1000.0 * lambda * sum_pi;
    int n = 1;
    while (n < kScanCap &&
           allowance * (1.0 - delay_cdf(e.delay, static_cast<double>(n - 1))) >=
               floor)
        ++n;
    return n + e.d + 2;
}

// --- exact gap-skipping kernel -------------------------------------------
// Applies when the intensity decays deterministically, the inflation factor
// is a point mass and the return factor is log-normal or a point mass. Claim
// years are drawn directly from the exact inter-claim-year law (the count
// process has independent yearly Poisson counts, so the years with at least
// one claim follow an inhomogeneous geometric race with closed-form
// cumulative intensity); the return product over a claim-free gap collapses
// to a single log-normal draw. No horizon truncation is needed: a path ends
// when the exponential race certifies that no further claim ever occurs.

struct FastParams {
    double log_ci = 0.0;  // log(1+i), point mass
    bool ret_lognormal = false;
    double ret_mean_log = 0.0; // one-year log return parameters
    double ret_var_log = 0.0;
    double log_cr = 0.0;       // log(1+r) when the return is a point mass
    double phi = 0.0;
    double lambda = 0.0;
    double kfac = 0.0; // lambda / (e^phi - 1): total expected claim count
};

bool fast_runoff_eligible(const RunoffModelSpec& spec) {
    if (spec.rule != TransitionRule::claims_start_of_year) return false;
    if (!std::holds_alternative<DeterministicExpXi>(spec.xi)) return false;
    const auto* ind = std::get_if<IndependentIr>(&spec.ir);
    if (!ind) return false;
    if (!std::holds_alternative<Constant>(ind->inflation_factor)) return false;
    return std::holds_alternative<Constant>(ind->return_factor) ||
           std::holds_alternative<LogNormal>(ind->return_factor);
}

FastParams make_fast_params(const RunoffModelSpec& spec) {
    FastParams p;
    const auto& ind = std::get<IndependentIr>(spec.ir);
    p.log_ci = std::log(std::get<Constant>(ind.inflation_factor).value);
    if (const auto* ln = std::get_if<LogNormal>(&ind.return_factor)) {
        p.ret_lognormal = true;
        p.ret_mean_log = ln->mean_log;
        p.ret_var_log = ln->var_log;
    } else {
        p.log_cr = std::log(std::get<Constant>(ind.return_factor).value);
    }
    p.phi = std::get<DeterministicExpXi>(spec.xi).phi;
    p.lambda = spec.lambda;
    p.kfac = spec.lambda / std::expm1(p.phi);
    return p;
}

double gap_return_product(const FastParams& p, long long gap, RngStream& rng) {
    const double g = static_cast<double>(gap);
    if (p.ret_lognormal)
        return std::exp(g * p.ret_mean_log +
                        std::sqrt(g * p.ret_var_log) * rng.normal());
    return std::exp(g * p.log_cr);
}

struct FastOutcome {
    bool ruined = false;
    long long ruin_year = 0;
    long long last_year = 0; // last claim year processed
    double u_prime = 0.0;    // deflated capital at the breakpoint (survivors)
};

// horizon > 0: claims after that year are out of scope (fixed horizon).
// breakpoint > 0: stop at that year and realize the capital there (hybrid);
// must equal horizon when set.
FastOutcome fast_runoff_path(const FastParams& p,
                             const DistributionSpec& claim_size, double u,
                             long long horizon, long long breakpoint,
                             RngStream& rng) {
    FastOutcome out;
    double w = u;            // capital; returns from year `pending` unapplied
    long long pending = 1;   // first year whose return is unapplied
    long long a = 0;         // last claim year handled
    for (;;) {
        const double e = rng.exponential(1.0);
        const double xa = std::exp(-p.phi * static_cast<double>(a));
        const double rem = xa - e / p.kfac;
        long long b = kNoClaim;
        if (rem > 0.0) {
            b = static_cast<long long>(std::ceil(-std::log(rem) / p.phi));
            if (b <= a) b = a + 1;
            // The race requires the cumulative intensity gap to cover the
            // exponential draw; nudge across floating-point ties.
            while (p.kfac *
                       (xa - std::exp(-p.phi * static_cast<double>(b))) < e)
                ++b;
        }
        if (horizon > 0 && b > horizon) b = kNoClaim;
        if (b == kNoClaim) break;
        const long long gap = b - pending;
        if (gap > 0) w *= gap_return_product(p, gap, rng);
        const double nu = p.lambda * std::exp(-p.phi * static_cast<double>(b));
        if (!(nu > 0.0)) break; // intensity underflow: no effective claim
        const std::uint64_t count = rng.poisson_positive(nu);
        const double total = sample_claim_total(claim_size, count, rng);
        w -= std::exp(p.log_ci * static_cast<double>(b)) * total;
        out.last_year = b;
        if (w < 0.0) {
            out.ruined = true;
            out.ruin_year = b;
            return out;
        }
        pending = b;
        a = b;
    }
    if (breakpoint > 0) {
        const long long gap = breakpoint - pending + 1;
        if (gap > 0) w *= gap_return_product(p, gap, rng);
        out.u_prime = w * std::exp(-p.log_ci * static_cast<double>(breakpoint));
        out.last_year = breakpoint;
    }
    return out;
}

} // namespace

// --------------------------------------------------------------------------

McRuinResult mc_ruin(const RunoffModelSpec& spec, double u,
                     const McConfig& cfg) {
    validate(spec);
    check_cfg(cfg);
    if (!(u > 0.0)) throw std::invalid_argument("mc_ruin: need u > 0");
    if (std::holds_alternative<AdaptiveGrowth>(cfg.horizon))
        throw std::invalid_argument(
            "mc_ruin: run-off models take FixedHorizon or AdaptiveRunoff");
    const auto t0 = std::chrono::steady_clock::now();

    const auto* fixed = std::get_if<FixedHorizon>(&cfg.horizon);
    const double floor =
        fixed ? 0.0 : std::get<AdaptiveRunoff>(cfg.horizon).intensity_floor;
    const bool fast = !cfg.force_reference_kernel && fast_runoff_eligible(spec);
    const auto* det = std::get_if<DeterministicExpXi>(&spec.xi);
    const auto* rep_delay = std::get_if<ReportingDelayXi>(&spec.xi);

    RunoffModelSpec local = spec;
    long long det_stop = 0; // adaptive deterministic: first year not simulated
    int prep_cap = 0;       // adaptive reporting-delay: per-path year cap
    if (!fast) {
        if (det && !fixed) {
            long long n = std::max<long long>(
                1, static_cast<long long>(
                       std::log(std::max(1.0, spec.lambda / floor /
                                                  (1.0 - std::exp(-det->phi)))) /
                       det->phi) -
                       3);
            while (det_resid(spec.lambda, det->phi, n) >= floor) ++n;
            det_stop = n;
        }
        if (rep_delay) {
            prep_cap = fixed ? fixed->years
                             : exposure_prep_cap(rep_delay->exposure,
                                                 spec.lambda, floor);
            prepare(local, prep_cap);
        }
    }
    FastParams fp;
    if (fast) fp = make_fast_params(local);

    std::vector<BlockSlot> slots;
    auto body = [&](std::uint64_t lo, std::uint64_t hi, BlockSlot& slot) {
        Kahan bias;
        if (cfg.collect_ruin_times) slot.times.reserve(64);
        for (std::uint64_t rep = lo; rep < hi; ++rep) {
            RngStream rng(cfg.seed, cfg.stream_offset + rep);
            bool ruined = false;
            long long ruin_year = 0;
            if (fast) {
                const FastOutcome out = fast_runoff_path(
                    fp, local.claim_size, u, fixed ? fixed->years : 0, 0, rng);
                ruined = out.ruined;
                ruin_year = out.ruin_year;
                slot.max_year = std::max(slot.max_year, out.last_year);
                if (!ruined && fixed)
                    bias.add(det_resid(fp.lambda, fp.phi, fixed->years + 1));
            } else {
                PathState st = init_path(local, u, rng);
                const long long cap = fixed ? fixed->years
                                            : (det ? det_stop - 1
                                                   : static_cast<long long>(
                                                         prep_cap));
                long long n = 1;
                for (; n <= cap; ++n) {
                    if (!fixed && rep_delay &&
                        exposure_resid(rep_delay->exposure, st.q_past,
                                       local.lambda, n) < floor)
                        break;
                    simulate_year(st, local, rng);
                    slot.max_year = std::max(slot.max_year, n);
                    if (st.ruined) {
                        ruined = true;
                        ruin_year = n;
                        break;
                    }
                }
                if (!ruined) {
                    if (det)
                        bias.add(det_resid(local.lambda, det->phi,
                                           fixed ? fixed->years + 1
                                                 : det_stop));
                    else
                        bias.add(std::min(
                            1.0, exposure_resid(rep_delay->exposure, st.q_past,
                                                local.lambda,
                                                fixed ? fixed->years + 1 : n)));
                }
            }
            if (ruined) {
                ++slot.ruins;
                if (cfg.collect_ruin_times)
                    slot.times.push_back(static_cast<double>(ruin_year));
            }
        }
        slot.bias = bias.s;
    };
    run_partitioned(cfg.replications, cfg.workers, slots, body);
    Totals tot = reduce(slots, cfg.collect_ruin_times);

    McRuinResult res;
    EstimateReport& r = res.report;
    r.method = "mc";
    r.u = u;
    r.lambda = spec.lambda;
    r.replications = cfg.replications;
    r.seed = cfg.seed;
    binomial_report_fields(r, tot.ruins, cfg.replications);
    r.horizon = fixed ? fixed->years
                      : static_cast<int>(std::min<long long>(
                            tot.max_year, std::numeric_limits<int>::max()));
    r.bias_bound = tot.bias / static_cast<double>(cfg.replications);
    r.extras = {{"ruins", static_cast<double>(tot.ruins)},
                {"exact_kernel", fast ? 1.0 : 0.0}};
    res.ruin_times = std::move(tot.times);
    r.wall_ms = wall_since(t0);
    return res;
}

McRuinResult mc_ruin(const GrowthModelSpec& spec, double u,
                     const McConfig& cfg) {
    validate(spec);
    check_cfg(cfg);
    if (!(u > 0.0)) throw std::invalid_argument("mc_ruin: need u > 0");
    if (std::holds_alternative<AdaptiveRunoff>(cfg.horizon))
        throw std::invalid_argument(
            "mc_ruin: growth models take FixedHorizon or AdaptiveGrowth");
    const auto t0 = std::chrono::steady_clock::now();

    const auto* fixed = std::get_if<FixedHorizon>(&cfg.horizon);
    const double floor =
        fixed ? 0.0 : std::get<AdaptiveGrowth>(cfg.horizon).discount_floor;

    // Mean one-year volume-discount factor E[(1+i)(1+g)/(1+r)]; the Markov
    // residual bound needs it below 1.
    const double e_d = std::exp(eval(growth_rate_expr(spec), 1.0));
    double resid_coeff = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(e_d) && e_d < 1.0) {
        CgfExpr infl;
        append_log_inflation(infl, spec.ir);
        const double year_factor =
            std::exp(eval(infl, 1.0) + log_moment(spec.growth_factor, 1.0));
        resid_coeff =
            spec.lambda * mean(spec.claim_size) * year_factor / (1.0 - e_d);
    }
    const bool bias_available = std::isfinite(resid_coeff);
    if (!fixed && !bias_available)
        throw std::invalid_argument(
            "mc_ruin: the adaptive growth horizon needs a mean volume-discount "
            "factor below 1 to bound the residual");
    const double disc_threshold = floor * std::min(1.0, 1.0 / u);

    std::vector<BlockSlot> slots;
    auto body = [&](std::uint64_t lo, std::uint64_t hi, BlockSlot& slot) {
        Kahan bias;
        if (cfg.collect_ruin_times) slot.times.reserve(64);
        for (std::uint64_t rep = lo; rep < hi; ++rep) {
            RngStream rng(cfg.seed, cfg.stream_offset + rep);
            PathState st = init_path(spec, u, rng);
            bool ruined = false;
            long long n = 1;
            const long long cap = fixed ? fixed->years : kGrowthYearCap;
            for (;; ++n) {
                simulate_year(st, spec, rng);
                if (st.ruined) {
                    ruined = true;
                    break;
                }
                if (n >= cap) break;
                if (!fixed) {
                    const double disc =
                        st.discount_product * st.growth_product;
                    if (disc < disc_threshold && st.y_value < u) break;
                }
            }
            slot.max_year = std::max(slot.max_year, n);
            if (ruined) {
                ++slot.ruins;
                if (cfg.collect_ruin_times)
                    slot.times.push_back(static_cast<double>(n));
            } else if (bias_available) {
                const double resid =
                    st.discount_product * st.growth_product * resid_coeff;
                const double headroom = u - st.y_value;
                bias.add(headroom > 0.0 ? std::min(1.0, resid / headroom)
                                        : 1.0);
            }
        }
        slot.bias = bias.s;
    };
    run_partitioned(cfg.replications, cfg.workers, slots, body);
    Totals tot = reduce(slots, cfg.collect_ruin_times);

    McRuinResult res;
    EstimateReport& r = res.report;
    r.method = "mc";
    r.u = u;
    r.lambda = spec.lambda;
    r.replications = cfg.replications;
    r.seed = cfg.seed;
    binomial_report_fields(r, tot.ruins, cfg.replications);
    r.horizon = static_cast<int>(std::min<long long>(
        tot.max_year, std::numeric_limits<int>::max()));
    r.bias_bound = bias_available
                       ? tot.bias / static_cast<double>(cfg.replications)
                       : std::numeric_limits<double>::quiet_NaN();
    r.extras = {{"ruins", static_cast<double>(tot.ruins)},
                {"exact_kernel", 0.0}};
    res.ruin_times = std::move(tot.times);
    r.wall_ms = wall_since(t0);
    return res;
}

int choose_n0(const RunoffModelSpec& spec, double lambda0) {
    validate(spec);
    if (!(lambda0 > 0.0))
        throw std::invalid_argument("choose_n0: need lambda0 > 0");
    if (spec.lambda <= lambda0) return 0;
    return std::visit(
        overload{
            [&](const DeterministicExpXi& x) {
                long long n = std::max<long long>(
                    0, static_cast<long long>(
                           std::ceil(std::log(spec.lambda / lambda0) / x.phi)) -
                           3);
                while (spec.lambda *
                           std::exp(-x.phi * static_cast<double>(n)) >
                       lambda0)
                    ++n;
                return static_cast<int>(n);
            },
            [&](const ReportingDelayXi& x) {
                RunoffModelSpec local = spec;
                int last_above = 0;
                for (int n = 1; n <= kScanCap; ++n) {
                    // Extend the delay-weight cache in chunks, not per year.
                    prepare(local, std::min(kScanCap, (n | 0xFF) + 1));
                    if (spec.lambda * mean_xi_at(local, n) > lambda0)
                        last_above = n;
                    // All later years sit below the remaining-count bound.
                    if (exposure_resid(x.exposure,
                                       std::vector<double>(
                                           x.exposure.pi.size(), 1.0),
                                       spec.lambda, n + 1) <= lambda0)
                        break;
                }
                return last_above == 0 ? 0 : last_above + 1;
            },
        },
        spec.xi);
}

HybridResult hybrid_ruin(const RunoffModelSpec& spec, double u, double lambda0,
                         const McConfig& cfg) {
    validate(spec);
    check_cfg(cfg);
    if (!(u > 0.0)) throw std::invalid_argument("hybrid_ruin: need u > 0");
    const RunoffAsymptotics sol = solve_runoff_asymptotics(spec);
    const int n0 = choose_n0(spec, lambda0);
    const auto t0 = std::chrono::steady_clock::now();

    HybridResult res;
    res.n0 = n0;
    if (n0 == 0) {
        EstimateReport r = asymptotic_ruin_runoff(spec, u);
        r.method = "hybrid";
        r.seed = cfg.seed;
        r.extras.emplace_back("n0", 0.0);
        r.wall_ms = wall_since(t0);
        res.report = std::move(r);
        return res;
    }

    const bool fast = !cfg.force_reference_kernel && fast_runoff_eligible(spec);
    const auto* det = std::get_if<DeterministicExpXi>(&spec.xi);
    const auto* rep_delay = std::get_if<ReportingDelayXi>(&spec.xi);
    RunoffModelSpec local = spec;
    if (!fast && rep_delay) prepare(local, n0);
    const RunoffExposure* prepared_exposure =
        rep_delay ? &std::get<ReportingDelayXi>(local.xi).exposure : nullptr;
    FastParams fp;
    if (fast) fp = make_fast_params(local);
    const double det_lambda_n0 =
        det ? spec.lambda * std::exp(-det->phi * n0) : 0.0;

    std::vector<BlockSlot> slots;
    auto body = [&](std::uint64_t lo, std::uint64_t hi, BlockSlot& slot) {
        Kahan sum, sum2;
        for (std::uint64_t rep = lo; rep < hi; ++rep) {
            RngStream rng(cfg.seed, cfg.stream_offset + rep);
            double score;
            bool ruined = false;
            double u_prime = 0.0;
            double lambda_n0 = det_lambda_n0;
            if (fast) {
                const FastOutcome out = fast_runoff_path(
                    fp, local.claim_size, u, n0, n0, rng);
                ruined = out.ruined;
                u_prime = out.u_prime;
            } else {
                PathState st = init_path(local, u, rng);
                for (int n = 1; n <= n0; ++n) {
                    simulate_year(st, local, rng);
                    if (st.ruined) {
                        ruined = true;
                        break;
                    }
                }
                if (!ruined) {
                    u_prime = st.capital / st.infl_product;
                    if (prepared_exposure)
                        lambda_n0 = local.lambda *
                                    xi_from_exposure(*prepared_exposure, n0,
                                                     st.q_past);
                }
            }
            if (ruined) {
                ++slot.ruins;
                score = 1.0;
            } else {
                const double raw = sol.prefactor * lambda_n0 *
                                   std::pow(u_prime, -sol.rho);
                if (raw >= 0.0 && raw <= 1.0) {
                    score = raw;
                } else {
                    // The closed form blows past [0,1] at tiny surviving
                    // capital (or NaN at degenerate inputs): clamp and count.
                    score = raw < 0.0 ? 0.0 : 1.0;
                    ++slot.clamped;
                }
            }
            sum.add(score);
            sum2.add(score * score);
        }
        slot.sum = sum.s;
        slot.sum2 = sum2.s;
    };
    run_partitioned(cfg.replications, cfg.workers, slots, body);
    Totals tot = reduce(slots, false);

    const double n = static_cast<double>(cfg.replications);
    const double est = tot.sum / n;
    double var = 0.0;
    if (cfg.replications > 1)
        var = std::max(0.0, (tot.sum2 - tot.sum * tot.sum / n) / (n - 1.0));
    const double se = std::sqrt(var / n);
    const double z = normal_quantile(0.975);

    EstimateReport& r = res.report;
    r.method = "hybrid";
    r.u = u;
    r.lambda = spec.lambda;
    r.estimate = std::min(1.0, std::max(0.0, est));
    r.std_error = se;
    r.ci_lo = std::max(0.0, est - z * se);
    r.ci_hi = std::min(1.0, est + z * se);
    r.replications = cfg.replications;
    r.seed = cfg.seed;
    r.horizon = n0;
    r.checks = sol.checks;
    r.extras = {{"n0", static_cast<double>(n0)},
                {"ruin_count", static_cast<double>(tot.ruins)},
                {"clamped", static_cast<double>(tot.clamped)},
                {"rho", sol.rho},
                {"mu", sol.mu},
                {"prefactor", sol.prefactor},
                {"exact_kernel", fast ? 1.0 : 0.0}};
    if (det) r.extras.emplace_back("lambda_n0", det_lambda_n0);
    res.ruin_count = tot.ruins;
    res.clamped = tot.clamped;
    r.wall_ms = wall_since(t0);
    return res;
}

} // namespace ruin
