#include "ruinsim/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <utility>

#include <json.hpp>

#include "ruinsim/montecarlo.hpp"

namespace ruin {

namespace {

using nlohmann::json;

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- lookup helpers -------------------------------------------------------

const json& need(const json& j, const char* key, const std::string& ctx) {
    const auto it = j.find(key);
    if (it == j.end()) fail(ctx + ": missing key '" + key + "'");
    return *it;
}

double as_num(const json& v, const std::string& ctx) {
    if (!v.is_number()) fail(ctx + ": expected a number");
    return v.get<double>();
}

double need_num(const json& j, const char* key, const std::string& ctx) {
    return as_num(need(j, key, ctx), ctx + "." + key);
}

double opt_num(const json& j, const char* key, double dflt,
               const std::string& ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return dflt;
    return as_num(*it, ctx + "." + key);
}

std::uint64_t opt_uint(const json& j, const char* key, std::uint64_t dflt,
                       const std::string& ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return dflt;
    if (!(it->is_number_unsigned() ||
          (it->is_number_integer() && it->get<std::int64_t>() >= 0)))
        fail(ctx + "." + key + ": expected a nonnegative integer");
    return it->get<std::uint64_t>();
}

std::string need_str(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_string()) fail(ctx + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::string opt_str(const json& j, const char* key, const std::string& dflt,
                    const std::string& ctx) {
    const auto it = j.find(key);
    if (it == j.end()) return dflt;
    if (!it->is_string()) fail(ctx + "." + key + ": expected a string");
    return it->get<std::string>();
}

std::vector<double> num_array(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.empty())
        fail(ctx + ": expected a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_num(e, ctx));
    return out;
}

// --- distribution / model blocks -------------------------------------------

DistributionSpec dist_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail(ctx + ": expected a distribution object");
    const std::string fam = need_str(j, "family", ctx);
    if (fam == "constant") return Constant{need_num(j, "value", ctx)};
    if (fam == "lognormal")
        return LogNormal{need_num(j, "mean_log", ctx),
                         need_num(j, "var_log", ctx)};
    if (fam == "exponential") return Exponential{need_num(j, "mean", ctx)};
    if (fam == "gamma")
        return GammaDist{need_num(j, "shape", ctx), need_num(j, "rate", ctx)};
    if (fam == "discrete")
        return DiscreteWeighted{
            num_array(need(j, "values", ctx), ctx + ".values"),
            num_array(need(j, "probs", ctx), ctx + ".probs")};
    fail(ctx + ": unknown distribution family '" + fam + "'");
}

json dist_to_json(const DistributionSpec& d) {
    return std::visit(
        overload{
            [](const Constant& c) {
                return json{{"family", "constant"}, {"value", c.value}};
            },
            [](const LogNormal& l) {
                return json{{"family", "lognormal"},
                            {"mean_log", l.mean_log},
                            {"var_log", l.var_log}};
            },
            [](const Exponential& e) {
                return json{{"family", "exponential"}, {"mean", e.mean}};
            },
            [](const GammaDist& g) {
                return json{{"family", "gamma"},
                            {"shape", g.shape},
                            {"rate", g.rate}};
            },
            [](const DiscreteWeighted& d) {
                return json{{"family", "discrete"},
                            {"values", d.values},
                            {"probs", d.probs}};
            },
        },
        d);
}

IrLaw ir_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail(ctx + ": expected an object");
    const std::string type = need_str(j, "type", ctx);
    if (type == "independent")
        return IndependentIr{
            dist_from_json(need(j, "inflation_factor", ctx),
                           ctx + ".inflation_factor"),
            dist_from_json(need(j, "return_factor", ctx),
                           ctx + ".return_factor")};
    if (type == "joint_discrete")
        return JointDiscreteIr{
            num_array(need(j, "inflation_factor", ctx),
                      ctx + ".inflation_factor"),
            num_array(need(j, "return_factor", ctx), ctx + ".return_factor"),
            num_array(need(j, "probs", ctx), ctx + ".probs")};
    fail(ctx + ": unknown ir type '" + type + "'");
}

json ir_to_json(const IrLaw& ir) {
    return std::visit(
        overload{
            [](const IndependentIr& i) {
                return json{{"type", "independent"},
                            {"inflation_factor",
                             dist_to_json(i.inflation_factor)},
                            {"return_factor", dist_to_json(i.return_factor)}};
            },
            [](const JointDiscreteIr& i) {
                return json{{"type", "joint_discrete"},
                            {"inflation_factor", i.inflation_factor},
                            {"return_factor", i.return_factor},
                            {"probs", i.probs}};
            },
        },
        ir);
}

DelayModel delay_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail(ctx + ": expected an object");
    const std::string type = need_str(j, "type", ctx);
    if (type == "gamma")
        return GammaDelay{need_num(j, "shape", ctx), need_num(j, "rate", ctx)};
    if (type == "table") {
        TabulatedDelay t;
        t.x = num_array(need(j, "x", ctx), ctx + ".x");
        t.cdf = num_array(need(j, "cdf", ctx), ctx + ".cdf");
        t.phi = need_num(j, "phi", ctx);
        t.h = RegVaryingFactor{opt_num(j, "h_coeff", 1.0, ctx),
                               opt_num(j, "h_power", 0.0, ctx)};
        return t;
    }
    fail(ctx + ": unknown delay type '" + type + "'");
}

json delay_to_json(const DelayModel& d) {
    return std::visit(
        overload{
            [](const GammaDelay& g) {
                return json{{"type", "gamma"},
                            {"shape", g.shape},
                            {"rate", g.rate}};
            },
            [](const TabulatedDelay& t) {
                return json{{"type", "table"}, {"x", t.x},   {"cdf", t.cdf},
                            {"phi", t.phi},   {"h_coeff", t.h.coeff},
                            {"h_power", t.h.power}};
            },
        },
        d);
}

XiModel xi_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail(ctx + ": expected an object");
    const std::string type = need_str(j, "type", ctx);
    if (type == "deterministic_exp")
        return DeterministicExpXi{need_num(j, "phi", ctx)};
    if (type == "reporting_delay") {
        RunoffExposure e;
        const double d = need_num(j, "d", ctx);
        if (d < 0.0 || d != std::floor(d))
            fail(ctx + ".d: expected a nonnegative integer");
        e.d = static_cast<int>(d);
        e.pi = num_array(need(j, "pi", ctx), ctx + ".pi");
        e.dist_q = dist_from_json(need(j, "q", ctx), ctx + ".q");
        e.delay = delay_from_json(need(j, "delay", ctx), ctx + ".delay");
        return ReportingDelayXi{std::move(e)};
    }
    fail(ctx + ": unknown xi type '" + type + "'");
}

json xi_to_json(const XiModel& xi) {
    return std::visit(
        overload{
            [](const DeterministicExpXi& x) {
                return json{{"type", "deterministic_exp"}, {"phi", x.phi}};
            },
            [](const ReportingDelayXi& x) {
                return json{{"type", "reporting_delay"},
                            {"d", x.exposure.d},
                            {"pi", x.exposure.pi},
                            {"q", dist_to_json(x.exposure.dist_q)},
                            {"delay", delay_to_json(x.exposure.delay)}};
            },
        },
        xi);
}

TransitionRule rule_from_json(const json& j, const std::string& ctx) {
    const std::string r =
        opt_str(j, "rule", "claims_start_of_year", ctx);
    if (r == "claims_start_of_year")
        return TransitionRule::claims_start_of_year;
    if (r == "claims_end_of_year") return TransitionRule::claims_end_of_year;
    fail(ctx + ".rule: unknown transition rule '" + r + "'");
}

std::variant<GrowthModelSpec, RunoffModelSpec> model_from_json(const json& j) {
    const std::string ctx = "config.model";
    if (!j.is_object()) fail(ctx + ": expected an object");
    const std::string type = need_str(j, "type", ctx);
    if (type == "growth") {
        GrowthModelSpec m;
        m.lambda = need_num(j, "lambda", ctx);
        m.safety_loading = opt_num(j, "safety_loading", 0.0, ctx);
        m.ir = ir_from_json(need(j, "ir", ctx), ctx + ".ir");
        m.growth_factor = dist_from_json(need(j, "growth_factor", ctx),
                                         ctx + ".growth_factor");
        m.structure_q =
            dist_from_json(need(j, "structure_q", ctx), ctx + ".structure_q");
        m.claim_size =
            dist_from_json(need(j, "claim_size", ctx), ctx + ".claim_size");
        m.rule = rule_from_json(j, ctx);
        validate(m);
        return m;
    }
    if (type == "runoff") {
        RunoffModelSpec m;
        m.lambda = need_num(j, "lambda", ctx);
        m.ir = ir_from_json(need(j, "ir", ctx), ctx + ".ir");
        m.claim_size =
            dist_from_json(need(j, "claim_size", ctx), ctx + ".claim_size");
        m.xi = xi_from_json(need(j, "xi", ctx), ctx + ".xi");
        m.rule = rule_from_json(j, ctx);
        validate(m);
        return m;
    }
    fail(ctx + ".type: expected 'growth' or 'runoff'");
}

json model_to_json(const std::variant<GrowthModelSpec, RunoffModelSpec>& m) {
    return std::visit(
        overload{
            [](const GrowthModelSpec& g) {
                return json{
                    {"type", "growth"},
                    {"lambda", g.lambda},
                    {"safety_loading", g.safety_loading},
                    {"ir", ir_to_json(g.ir)},
                    {"growth_factor", dist_to_json(g.growth_factor)},
                    {"structure_q", dist_to_json(g.structure_q)},
                    {"claim_size", dist_to_json(g.claim_size)},
                    {"rule", g.rule == TransitionRule::claims_start_of_year
                                 ? "claims_start_of_year"
                                 : "claims_end_of_year"}};
            },
            [](const RunoffModelSpec& r) {
                return json{
                    {"type", "runoff"},
                    {"lambda", r.lambda},
                    {"ir", ir_to_json(r.ir)},
                    {"claim_size", dist_to_json(r.claim_size)},
                    {"xi", xi_to_json(r.xi)},
                    {"rule", r.rule == TransitionRule::claims_start_of_year
                                 ? "claims_start_of_year"
                                 : "claims_end_of_year"}};
            },
        },
        m);
}

HorizonPolicy horizon_from_json(const json& j, const std::string& ctx) {
    const std::string type = need_str(j, "type", ctx);
    if (type == "fixed") {
        const double y = need_num(j, "years", ctx);
        if (y < 1.0 || y != std::floor(y))
            fail(ctx + ".years: expected a positive integer");
        return FixedHorizon{static_cast<int>(y)};
    }
    if (type == "adaptive-runoff")
        return AdaptiveRunoff{opt_num(j, "intensity_floor", 1e-9, ctx)};
    if (type == "adaptive-growth")
        return AdaptiveGrowth{opt_num(j, "discount_floor", 1e-8, ctx)};
    fail(ctx + ".type: unknown horizon policy '" + type + "'");
}

json horizon_to_json(const HorizonPolicy& h) {
    return std::visit(
        overload{
            [](const FixedHorizon& f) {
                return json{{"type", "fixed"}, {"years", f.years}};
            },
            [](const AdaptiveRunoff& a) {
                return json{{"type", "adaptive-runoff"},
                            {"intensity_floor", a.intensity_floor}};
            },
            [](const AdaptiveGrowth& a) {
                return json{{"type", "adaptive-growth"},
                            {"discount_floor", a.discount_floor}};
            },
        },
        h);
}

McConfig mc_from_json(const json* j, bool growth_model) {
    McConfig cfg;
    if (growth_model) cfg.horizon = AdaptiveGrowth{};
    if (!j) return cfg;
    const std::string ctx = "config.mc";
    if (!j->is_object()) fail(ctx + ": expected an object");
    cfg.replications = opt_uint(*j, "replications", cfg.replications, ctx);
    if (cfg.replications < 1) fail(ctx + ".replications: must be >= 1");
    cfg.seed = opt_uint(*j, "seed", cfg.seed, ctx);
    cfg.stream_offset = opt_uint(*j, "stream_offset", cfg.stream_offset, ctx);
    const std::uint64_t workers = opt_uint(*j, "workers", 1, ctx);
    if (workers < 1 || workers > 4096) fail(ctx + ".workers: out of range");
    cfg.workers = static_cast<int>(workers);
    if (const auto it = j->find("horizon"); it != j->end())
        cfg.horizon = horizon_from_json(*it, ctx + ".horizon");
    if (const auto it = j->find("force_reference_kernel"); it != j->end()) {
        if (!it->is_boolean())
            fail(ctx + ".force_reference_kernel: expected a boolean");
        cfg.force_reference_kernel = it->get<bool>();
    }
    return cfg;
}

json mc_to_json(const McConfig& cfg) {
    return json{{"replications", cfg.replications},
                {"seed", cfg.seed},
                {"stream_offset", cfg.stream_offset},
                {"workers", cfg.workers},
                {"horizon", horizon_to_json(cfg.horizon)},
                {"force_reference_kernel", cfg.force_reference_kernel}};
}

GoldieMcConfig goldie_from_json(const json* j, std::uint64_t default_seed) {
    GoldieMcConfig g;
    g.seed = default_seed;
    if (!j) return g;
    const std::string ctx = "config.goldie";
    if (!j->is_object()) fail(ctx + ": expected an object");
    g.r_samples = opt_uint(*j, "r_samples", g.r_samples, ctx);
    if (g.r_samples < 1) fail(ctx + ".r_samples: must be >= 1");
    g.burn_in = opt_uint(*j, "burn_in", g.burn_in, ctx);
    g.thin = opt_uint(*j, "thin", g.thin, ctx);
    if (g.thin < 1) fail(ctx + ".thin: must be >= 1");
    g.batches = opt_uint(*j, "batches", g.batches, ctx);
    if (g.batches < 1) fail(ctx + ".batches: must be >= 1");
    g.seed = opt_uint(*j, "seed", g.seed, ctx);
    g.stream = opt_uint(*j, "stream", g.stream, ctx);
    return g;
}

json goldie_to_json(const GoldieMcConfig& g) {
    return json{{"r_samples", g.r_samples}, {"burn_in", g.burn_in},
                {"thin", g.thin},           {"batches", g.batches},
                {"seed", g.seed},           {"stream", g.stream}};
}

CompoundTailProblem compound_from_json(const json& j) {
    const std::string ctx = "config.compound";
    if (!j.is_object()) fail(ctx + ": expected an object");
    CompoundTailProblem p;
    p.exp_increment = dist_from_json(need(j, "exp_increment", ctx),
                                     ctx + ".exp_increment");
    if (const auto it = j.find("exp_shift"); it != j.end())
        p.exp_shift = dist_from_json(*it, ctx + ".exp_shift");
    else
        p.exp_shift = Constant{1.0};
    p.upsilon = need_num(j, "upsilon", ctx);
    if (!(p.upsilon > 0.0)) fail(ctx + ".upsilon: must be > 0");
    p.f = RegVaryingFactor{opt_num(j, "f_coeff", 1.0, ctx),
                           opt_num(j, "f_power", 0.0, ctx)};
    return p;
}

json compound_to_json(const CompoundTailProblem& p) {
    return json{{"exp_increment", dist_to_json(p.exp_increment)},
                {"exp_shift", dist_to_json(p.exp_shift)},
                {"upsilon", p.upsilon},
                {"f_coeff", p.f.coeff},
                {"f_power", p.f.power}};
}

const std::vector<std::string>& known_estimators() {
    static const std::vector<std::string> names = {
        "mc",           "hybrid",        "asymptotic-runoff",
        "asymptotic-growth", "compound-tail", "decomposition"};
    return names;
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("config: top level must be an object");
    try {
        ExperimentConfig cfg;
        cfg.model = model_from_json(need(j, "model", "config"));
        const bool growth =
            std::holds_alternative<GrowthModelSpec>(cfg.model);

        cfg.u_grid = num_array(need(j, "u", "config"), "config.u");
        for (double u : cfg.u_grid)
            if (!(u > 0.0)) fail("config.u: entries must be > 0");

        if (const auto it = j.find("lambda"); it != j.end()) {
            cfg.lambda_grid = num_array(*it, "config.lambda");
        } else {
            cfg.lambda_grid = {std::visit(
                [](const auto& m) { return m.lambda; }, cfg.model)};
        }
        for (double l : cfg.lambda_grid)
            if (!(l > 0.0)) fail("config.lambda: entries must be > 0");

        const json& est = need(j, "estimators", "config");
        if (!est.is_array()) fail("config.estimators: expected an array");
        for (const auto& e : est) {
            if (!e.is_string())
                fail("config.estimators: entries must be strings");
            const std::string name = e.get<std::string>();
            bool known = false;
            for (const auto& k : known_estimators()) known |= (k == name);
            if (!known) fail("config.estimators: unknown estimator '" + name +
                             "'");
            cfg.estimators.push_back(name);
        }
        if (cfg.estimators.empty()) fail("config.estimators: list is empty");

        const auto mc_it = j.find("mc");
        cfg.mc = mc_from_json(mc_it != j.end() ? &*mc_it : nullptr, growth);

        cfg.lambda0 = opt_num(j, "lambda0", cfg.lambda0, "config");
        if (!(cfg.lambda0 > 0.0)) fail("config.lambda0: must be > 0");
        const double n_max = opt_num(j, "n_max", cfg.n_max, "config");
        if (n_max < 1.0 || n_max != std::floor(n_max))
            fail("config.n_max: expected a positive integer");
        cfg.n_max = static_cast<int>(n_max);
        cfg.decomposition_samples = opt_uint(
            j, "decomposition_samples", cfg.decomposition_samples, "config");

        const auto g_it = j.find("goldie");
        cfg.goldie =
            goldie_from_json(g_it != j.end() ? &*g_it : nullptr, cfg.mc.seed);

        if (const auto it = j.find("compound"); it != j.end())
            cfg.compound = compound_from_json(*it);

        if (const auto it = j.find("output"); it != j.end()) {
            if (!it->is_object()) fail("config.output: expected an object");
            cfg.output.csv = opt_str(*it, "csv", "", "config.output");
            cfg.output.report = opt_str(*it, "report", "", "config.output");
            cfg.output.trace = opt_str(*it, "trace", "", "config.output");
        }
        return cfg;
    } catch (const json::exception& e) {
        fail(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        fail(std::string("config: ") + e.what());
    }
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["model"] = model_to_json(cfg.model);
    j["u"] = cfg.u_grid;
    j["lambda"] = cfg.lambda_grid;
    j["estimators"] = cfg.estimators;
    j["mc"] = mc_to_json(cfg.mc);
    j["lambda0"] = cfg.lambda0;
    j["n_max"] = cfg.n_max;
    j["decomposition_samples"] = cfg.decomposition_samples;
    j["goldie"] = goldie_to_json(cfg.goldie);
    if (cfg.compound) j["compound"] = compound_to_json(*cfg.compound);
    if (!cfg.output.csv.empty() || !cfg.output.report.empty() ||
        !cfg.output.trace.empty())
        j["output"] = json{{"csv", cfg.output.csv},
                           {"report", cfg.output.report},
                           {"trace", cfg.output.trace}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

namespace {

RunoffModelSpec reference_runoff_model() {
    RunoffModelSpec m;
    m.lambda = 0.1;
    m.ir = IndependentIr{Constant{std::exp(0.05)}, LogNormal{0.1, 0.1}};
    m.claim_size = Exponential{1.0};
    m.xi = DeterministicExpXi{0.1};
    return m;
}

} // namespace

ExperimentConfig preset_table51() {
    ExperimentConfig cfg;
    cfg.model = reference_runoff_model();
    cfg.u_grid = {10.0, 50.0, 200.0};
    cfg.lambda_grid = {0.1};
    cfg.estimators = {"asymptotic-runoff", "mc"};
    cfg.mc.replications = 1000000;
    return cfg;
}

ExperimentConfig preset_table52() {
    ExperimentConfig cfg;
    RunoffModelSpec m = reference_runoff_model();
    m.lambda = 100.0;
    cfg.model = std::move(m);
    cfg.u_grid = {5000.0, 10000.0, 50000.0};
    cfg.lambda_grid = {100.0};
    cfg.estimators = {"asymptotic-runoff", "mc", "hybrid"};
    cfg.mc.replications = 1000000;
    cfg.lambda0 = 0.1;
    return cfg;
}

// ---------------------------------------------------------------------------

namespace {

EstimateReport compound_report(const CompoundTailProblem& p, double u) {
    const auto t0 = std::chrono::steady_clock::now();
    const CompoundTailEstimate e = compound_tail(p, u);
    EstimateReport r;
    r.method = "compound-tail";
    r.u = u;
    r.lambda = 0.0;
    r.estimate = std::min(1.0, std::max(0.0, e.refined));
    r.std_error = 0.0;
    r.ci_lo = r.estimate;
    r.ci_hi = r.estimate;
    r.checks = e.checks;
    r.extras = {{"rho", e.rho},
                {"mu", e.mu},
                {"crude", e.crude},
                {"refined", e.refined}};
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    return r;
}

EstimateReport decomposition_report(const RunoffModelSpec& spec, double u,
                                    int n_max, std::uint64_t samples,
                                    std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const DecompositionSeries s =
        single_claim_decomposition(spec, u, n_max, samples, seed);
    EstimateReport r;
    r.method = "decomposition";
    r.u = u;
    r.lambda = spec.lambda;
    r.estimate = std::min(1.0, std::max(0.0, s.sum));
    r.std_error = 0.0;
    r.ci_lo = r.estimate;
    r.ci_hi = r.estimate;
    r.replications = s.quadrature_route ? 0 : samples;
    r.seed = s.quadrature_route ? 0 : seed;
    r.horizon = n_max;
    r.bias_bound = s.truncation_bound;
    r.extras = {{"series_sum", s.sum},
                {"argmax_n", static_cast<double>(s.argmax_n)},
                {"quadrature_route", s.quadrature_route ? 1.0 : 0.0}};
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    return r;
}

std::string make_trace(const ExperimentConfig& cfg) {
    std::string t = "year,capital,y_value,claim_count,claim_cost\n";
    const double u = cfg.u_grid.front();
    const double lam = cfg.lambda_grid.front();
    const auto* fixed = std::get_if<FixedHorizon>(&cfg.mc.horizon);
    const int cap = fixed ? std::min(fixed->years, 100000) : 1000;
    RngStream rng(cfg.mc.seed, cfg.mc.stream_offset);
    auto emit = [&](int year, const PathState& st, const YearOutcome& out) {
        t += std::to_string(year) + ',' + fmt_g(st.capital) + ',' +
             fmt_g(st.y_value) + ',' + std::to_string(out.claim_count) + ',' +
             fmt_g(out.claim_cost) + '\n';
    };
    std::visit(overload{
                   [&](const GrowthModelSpec& g) {
                       GrowthModelSpec m = g;
                       m.lambda = lam;
                       PathState st = init_path(m, u, rng);
                       for (int n = 1; n <= cap; ++n) {
                           const YearOutcome out = simulate_year(st, m, rng);
                           emit(n, st, out);
                           if (st.ruined) break;
                       }
                   },
                   [&](const RunoffModelSpec& r) {
                       RunoffModelSpec m = r;
                       m.lambda = lam;
                       prepare(m, cap);
                       PathState st = init_path(m, u, rng);
                       for (int n = 1; n <= cap; ++n) {
                           const YearOutcome out = simulate_year(st, m, rng);
                           emit(n, st, out);
                           if (st.ruined) break;
                       }
                   },
               },
               cfg.model);
    return t;
}

} // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool want_trace) {
    if (cfg.estimators.empty()) fail("config: estimator list is empty");
    if (cfg.u_grid.empty()) fail("config: u grid is empty");
    for (double u : cfg.u_grid)
        if (!(u > 0.0)) fail("config.u: entries must be > 0");
    for (double l : cfg.lambda_grid)
        if (!(l > 0.0)) fail("config.lambda: entries must be > 0");
    const bool growth = std::holds_alternative<GrowthModelSpec>(cfg.model);
    for (const auto& est : cfg.estimators) {
        if (growth && (est == "hybrid" || est == "asymptotic-runoff" ||
                       est == "decomposition"))
            fail("config: estimator '" + est + "' needs a run-off model");
        if (!growth && est == "asymptotic-growth")
            fail("config: estimator 'asymptotic-growth' needs a growth model");
        if (est == "compound-tail" && !cfg.compound)
            fail("config: estimator 'compound-tail' needs a compound block");
    }

    std::string csv = csv_header() + "\n";
    std::string report = std::string("toolkit_version: ") + kToolkitVersion +
                         "\nseed: " + std::to_string(cfg.mc.seed) + "\n";

    struct Cell {
        double mc = std::numeric_limits<double>::quiet_NaN();
        double asym = std::numeric_limits<double>::quiet_NaN();
        double hybrid = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Cell> cells(cfg.lambda_grid.size() * cfg.u_grid.size());

    for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
        const double lam = cfg.lambda_grid[li];
        GrowthModelSpec gspec;
        RunoffModelSpec rspec;
        if (growth) {
            gspec = std::get<GrowthModelSpec>(cfg.model);
            gspec.lambda = lam;
        } else {
            rspec = std::get<RunoffModelSpec>(cfg.model);
            rspec.lambda = lam;
        }
        std::optional<GrowthAsymptotics> gsol;
        for (const auto& est : cfg.estimators) {
            if (est == "asymptotic-growth" && !gsol)
                gsol = solve_growth_asymptotics(gspec, cfg.goldie);
        }
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
            const double u = cfg.u_grid[ui];
            Cell& cell = cells[li * cfg.u_grid.size() + ui];
            for (const auto& est : cfg.estimators) {
                EstimateReport r;
                if (est == "mc") {
                    r = growth ? mc_ruin(gspec, u, cfg.mc).report
                               : mc_ruin(rspec, u, cfg.mc).report;
                    cell.mc = r.estimate;
                } else if (est == "hybrid") {
                    r = hybrid_ruin(rspec, u, cfg.lambda0, cfg.mc).report;
                    cell.hybrid = r.estimate;
                } else if (est == "asymptotic-runoff") {
                    r = asymptotic_ruin_runoff(rspec, u);
                    cell.asym = r.estimate;
                } else if (est == "asymptotic-growth") {
                    r = asymptotic_ruin_growth(*gsol, u, lam);
                    r.seed = cfg.goldie.seed;
                    cell.asym = r.estimate;
                } else if (est == "compound-tail") {
                    if (li > 0) continue; // independent of the lambda grid
                    r = compound_report(*cfg.compound, u);
                } else { // decomposition
                    r = decomposition_report(rspec, u, cfg.n_max,
                                             cfg.decomposition_samples,
                                             cfg.mc.seed);
                }
                csv += csv_row(r) + "\n";
                report += "\n" + text_block(r);
            }
        }
    }

    std::string ratios;
    for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
            const Cell& c = cells[li * cfg.u_grid.size() + ui];
            const std::string where = " u=" + fmt_short(cfg.u_grid[ui]) +
                                      " lambda=" +
                                      fmt_short(cfg.lambda_grid[li]) + ": ";
            if (std::isfinite(c.mc) && std::isfinite(c.asym) && c.asym > 0.0)
                ratios += "ratio mc/asymptotic" + where +
                          fmt_short(c.mc / c.asym) + "\n";
            if (std::isfinite(c.hybrid) && std::isfinite(c.mc) && c.mc > 0.0)
                ratios += "ratio hybrid/mc" + where +
                          fmt_short(c.hybrid / c.mc) + "\n";
        }
    }
    if (!ratios.empty()) report += "\n" + ratios;

    ExperimentOutput out;
    out.csv = std::move(csv);
    out.report = std::move(report);
    if (want_trace || !cfg.output.trace.empty()) out.trace = make_trace(cfg);
    return out;
}

TailOutput tail_experiment(const ExperimentConfig& cfg) {
    const auto* rspec_in = std::get_if<RunoffModelSpec>(&cfg.model);
    if (!rspec_in)
        throw HypothesisViolation(
            "model_mode", "the tail scan is defined for run-off models only");
    if (cfg.u_grid.empty()) fail("config: u grid is empty");
    RunoffModelSpec spec = *rspec_in;
    if (!cfg.lambda_grid.empty()) spec.lambda = cfg.lambda_grid.front();
    const RunoffAsymptotics sol = solve_runoff_asymptotics(spec);

    TailOutput out;
    out.csv = "u,mc_estimate,asymptotic,ratio\n";
    std::vector<std::pair<double, double>> pts; // (log u, log estimate)
    for (double u : cfg.u_grid) {
        if (!(u > 0.0)) fail("config.u: entries must be > 0");
        const EstimateReport mc = mc_ruin(spec, u, cfg.mc).report;
        const EstimateReport asym = asymptotic_ruin_runoff(spec, u);
        const double ratio = asym.estimate > 0.0
                                 ? mc.estimate / asym.estimate
                                 : std::numeric_limits<double>::quiet_NaN();
        out.csv += fmt_g(u) + "," + fmt_g(mc.estimate) + "," +
                   fmt_g(asym.estimate) + "," + fmt_g(ratio) + "\n";
        if (mc.estimate > 0.0)
            pts.emplace_back(std::log(u), std::log(mc.estimate));
    }
    if (pts.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (const auto& [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxx = 0.0, sxy = 0.0;
        for (const auto& [x, y] : pts) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if (sxx > 0.0) {
            out.slope = sxy / sxx;
            out.has_slope = true;
        }
    }
    out.report = std::string("toolkit_version: ") + kToolkitVersion +
                 "\nseed: " + std::to_string(cfg.mc.seed) +
                 "\nlambda: " + fmt_g(spec.lambda) +
                 "\ndecay_exponent_rho: " + fmt_g(sol.rho) +
                 "\npoints_with_ruins: " + std::to_string(pts.size()) + "\n";
    if (out.has_slope)
        out.report += "tail_slope: " + fmt_g(out.slope) + "\n";
    else
        out.report += "tail_slope: omitted (need at least two positive "
                      "estimates)\n";
    return out;
}

} // namespace ruin
