#include "ruinsim/goldie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruinsim/cgf.hpp"
#include "ruinsim/special.hpp"

namespace ruin {

namespace {

constexpr double kDivergenceLevel = 1e12;
constexpr int kDivergenceStreak = 50;

struct ChainState {
    double r = 0.0;
    int oversize_streak = 0;
};

std::pair<double, double> draw_qm(const GoldieProblem& p, RngStream& rng) {
    auto qm = p.sample_qm(rng);
    if (qm.second < 0.0)
        throw NonPositiveM("fixed point: sampled M < 0");
    return qm;
}

void advance(ChainState& st, double next) {
    st.r = next;
    if (std::fabs(st.r) > kDivergenceLevel) {
        if (++st.oversize_streak >= kDivergenceStreak)
            throw DivergenceDetected(
                "fixed point: |R| stayed above 1e12; no stationary solution "
                "(is E log M < 0?)");
    } else {
        st.oversize_streak = 0;
    }
}

void step(ChainState& st, const GoldieProblem& p, RngStream& rng) {
    const auto [q, mm] = draw_qm(p, rng);
    advance(st, q + mm * std::max(0.0, st.r));
}

double monte_carlo_m(const GoldieProblem& p, double kappa, RngStream& rng) {
    constexpr std::size_t kDraws = 1000000;
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < kDraws; ++k) {
        const double mm = draw_qm(p, rng).second;
        // M^kappa log M, with the M -> 0 limit 0.
        const double term = mm > 0.0 ? std::pow(mm, kappa) * std::log(mm) : 0.0;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(kDraws);
}

} // namespace

GoldieProblem make_growth_goldie(const GrowthModelSpec& spec) {
    validate(spec);
    const LundbergSolution sol = solve_rate(growth_rate_expr(spec));
    if (sol.boundary || !std::isfinite(sol.derivative) ||
        !(sol.derivative > 0.0))
        throw NonPositiveM(
            "make_growth_goldie: tail index is a domain-boundary supremum; "
            "the normalizer E(M^kappa log M) is unavailable");
    GoldieProblem p;
    p.kappa = sol.rate;
    p.m = sol.derivative; // E M^kappa = 1 makes d/da log E M^a the normalizer
    const double scale = spec.lambda * mean(spec.claim_size);
    const double loading = 1.0 + spec.safety_loading;
    const IrLaw ir = spec.ir;
    const DistributionSpec growth = spec.growth_factor;
    const DistributionSpec q_law = spec.structure_q;
    p.sample_qm = [ir, growth, q_law, scale, loading](RngStream& rng) {
        const auto [infl, ret] = sample_ir(ir, rng);
        const double g = sample(growth, rng);
        const double q = sample(q_law, rng);
        return std::pair<double, double>{infl * g * scale * (q - loading),
                                         infl * g / ret};
    };
    return p;
}

std::vector<double> simulate_fixed_point(const GoldieProblem& p,
                                         std::size_t n_samples, RngStream& rng,
                                         std::size_t burn_in,
                                         std::size_t thin) {
    if (!p.sample_qm)
        throw std::invalid_argument("simulate_fixed_point: no sampler");
    if (thin == 0) thin = 1;
    std::vector<double> out;
    out.reserve(n_samples);
    ChainState st;
    for (std::size_t k = 0; k < burn_in; ++k) step(st, p, rng);
    while (out.size() < n_samples) {
        for (std::size_t k = 0; k < thin; ++k) step(st, p, rng);
        out.push_back(st.r);
    }
    return out;
}

GoldieConstantEstimate estimate_goldie_constant(
    const GoldieProblem& p, const std::vector<double>& r_samples,
    RngStream& rng, std::size_t batches) {
    if (!p.sample_qm)
        throw std::invalid_argument("estimate_goldie_constant: no sampler");
    if (!(p.kappa > 0.0) || !std::isfinite(p.kappa))
        throw std::invalid_argument(
            "estimate_goldie_constant: kappa must be positive and finite");
    if (r_samples.empty())
        throw std::invalid_argument(
            "estimate_goldie_constant: need at least one R sample");

    double m_used = p.m;
    if (std::isnan(m_used)) m_used = monte_carlo_m(p, p.kappa, rng);
    if (!(m_used > 0.0) || !std::isfinite(m_used))
        throw NonPositiveM(
            "estimate_goldie_constant: E(M^kappa log M) <= 0 (tail index "
            "would sit at a flat or decreasing point of the log-moment)");

    batches = std::max<std::size_t>(1, std::min(batches, r_samples.size()));
    const std::size_t per_batch = r_samples.size() / batches;
    const std::size_t used = per_batch * batches;

    std::vector<double> batch_mean(batches, 0.0);
    double total = 0.0, comp = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        double bsum = 0.0, bcomp = 0.0;
        for (std::size_t k = 0; k < per_batch; ++k) {
            const double r = r_samples[b * per_batch + k];
            const auto [q, mm] = draw_qm(p, rng);
            const double next = q + mm * std::max(0.0, r);
            const double t1 = next > 0.0 ? std::pow(next, p.kappa) : 0.0;
            const double mr = mm * r;
            const double t2 = mr > 0.0 ? std::pow(mr, p.kappa) : 0.0;
            const double delta = t1 - t2;
            const double y = delta - bcomp;
            const double t = bsum + y;
            bcomp = (t - bsum) - y;
            bsum = t;
        }
        batch_mean[b] = bsum / static_cast<double>(per_batch);
        const double y = bsum - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }

    const double mean_delta = total / static_cast<double>(used);
    double var_bm = 0.0;
    for (double b : batch_mean) {
        const double d = b - mean_delta;
        var_bm += d * d;
    }
    var_bm = batches > 1 ? var_bm / static_cast<double>(batches - 1) : 0.0;
    const double se_delta = std::sqrt(var_bm / static_cast<double>(batches));

    GoldieConstantEstimate est;
    est.kappa = p.kappa;
    est.m = m_used;
    est.samples = used;
    const double denom = p.kappa * m_used;
    est.value = mean_delta / denom;
    est.std_error = se_delta / denom;
    const double z = normal_quantile(0.975);
    est.ci_lo = est.value - z * est.std_error;
    est.ci_hi = est.value + z * est.std_error;
    return est;
}

double tail_slope(std::vector<double> samples, double survival_hi,
                  double survival_lo, int points) {
    if (samples.empty())
        throw std::invalid_argument("tail_slope: empty sample");
    if (!(survival_lo > 0.0) || !(survival_hi > survival_lo) ||
        !(survival_hi < 1.0))
        throw std::invalid_argument("tail_slope: need 0 < lo < hi < 1");
    if (points < 2) throw std::invalid_argument("tail_slope: need >= 2 levels");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());

    std::vector<double> lx, ly;
    const double lhi = std::log(survival_hi);
    const double llo = std::log(survival_lo);
    double last_t = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < points; ++j) {
        const double s = std::exp(lhi + (llo - lhi) * j / (points - 1));
        std::size_t idx = static_cast<std::size_t>((1.0 - s) * n);
        if (idx >= samples.size()) idx = samples.size() - 1;
        const double t = samples[idx];
        if (!(t > 0.0) || t == last_t) continue;
        const auto above = samples.end() -
                           std::upper_bound(samples.begin(), samples.end(), t);
        if (above < 5) continue; // too few exceedances for a stable level
        lx.push_back(std::log(t));
        ly.push_back(std::log(static_cast<double>(above) / n));
        last_t = t;
    }
    if (lx.size() < 2)
        throw std::runtime_error(
            "tail_slope: fewer than two usable thresholds (tail too thin or "
            "too discrete)");

    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    if (!(sxx > 0.0))
        throw std::runtime_error("tail_slope: degenerate thresholds");
    return sxy / sxx;
}

} // namespace ruin
