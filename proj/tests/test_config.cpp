#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ruinsim/config.hpp"
#include "ruinsim/report.hpp"

using namespace ruin;

namespace {

const char* kRunoffDoc = R"({
  "model": {
    "type": "runoff",
    "lambda": 2.5,
    "ir": {
      "type": "joint_discrete",
      "inflation_factor": [1.02, 1.03],
      "return_factor": [1.05, 1.0],
      "probs": [0.5, 0.5]
    },
    "claim_size": {"family": "gamma", "shape": 2.0, "rate": 3.0},
    "xi": {
      "type": "reporting_delay",
      "d": 1,
      "pi": [0.5, 1.0],
      "q": {"family": "constant", "value": 1.0},
      "delay": {"type": "table", "x": [0.0, 1.0], "cdf": [0.0, 1.0],
                "phi": 1.0, "h_coeff": 1.0, "h_power": 0.0}
    }
  },
  "u": [5.0, 10.0],
  "estimators": ["mc", "asymptotic-runoff"],
  "mc": {"replications": 4000, "seed": 7, "workers": 2}
})";

const char* kGrowthDoc = R"({
  "model": {
    "type": "growth",
    "lambda": 0.5,
    "safety_loading": 0.2,
    "ir": {
      "type": "independent",
      "inflation_factor": {"family": "constant", "value": 1.0202},
      "return_factor": {"family": "lognormal", "mean_log": 0.22,
                        "var_log": 0.15}
    },
    "growth_factor": {"family": "lognormal", "mean_log": 0.0,
                      "var_log": 0.05},
    "structure_q": {"family": "discrete", "values": [0.5, 1.5],
                    "probs": [0.5, 0.5]},
    "claim_size": {"family": "exponential", "mean": 1.0}
  },
  "u": [8.0],
  "estimators": ["mc", "asymptotic-growth"],
  "mc": {"replications": 3000, "seed": 11},
  "goldie": {"r_samples": 8000, "burn_in": 1000, "thin": 2}
})";

std::string patch(const std::string& doc, const std::string& from,
                  const std::string& to) {
    std::string out = doc;
    const auto pos = out.find(from);
    REQUIRE(pos != std::string::npos);
    out.replace(pos, from.size(), to);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto c = line.find(',', start);
        if (c == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, c - start));
        start = c + 1;
    }
}

std::string drop_last_field(const std::string& line) {
    const auto c = line.rfind(',');
    return c == std::string::npos ? line : line.substr(0, c);
}

// --- CLI helpers ------------------------------------------------------------

#ifndef RUINSIM_CLI_PATH
#define RUINSIM_CLI_PATH "./ruinsim"
#endif

int cli(const std::string& args) {
    const std::string cmd =
        std::string(RUINSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::filesystem::path tmp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    REQUIRE(out.good());
    out << text;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string s((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
    return s;
}

} // namespace

TEST_CASE("config round trip is the identity on canonical form") {
    const ExperimentConfig a = parse_config(kRunoffDoc);
    CHECK(std::holds_alternative<RunoffModelSpec>(a.model));
    CHECK(a.u_grid == std::vector<double>{5.0, 10.0});
    // lambda grid defaults to the model intensity.
    CHECK(a.lambda_grid == std::vector<double>{2.5});
    CHECK(a.estimators == std::vector<std::string>{"mc", "asymptotic-runoff"});
    CHECK(a.mc.replications == 4000);
    CHECK(a.mc.seed == 7);
    CHECK(a.mc.workers == 2);
    CHECK(std::holds_alternative<AdaptiveRunoff>(a.mc.horizon));
    CHECK(a.lambda0 == 0.1);
    CHECK(a.n_max == 400);

    const std::string s1 = serialize_config(a);
    const ExperimentConfig b = parse_config(s1);
    const std::string s2 = serialize_config(b);
    CHECK(s1 == s2);

    const ExperimentConfig g = parse_config(kGrowthDoc);
    CHECK(std::holds_alternative<GrowthModelSpec>(g.model));
    // Growth models default to the adaptive growth horizon.
    CHECK(std::holds_alternative<AdaptiveGrowth>(g.mc.horizon));
    // The fixed-point sampler inherits the MC seed unless overridden.
    CHECK(g.goldie.seed == 11);
    CHECK(g.goldie.r_samples == 8000);
    const std::string gs1 = serialize_config(g);
    CHECK(serialize_config(parse_config(gs1)) == gs1);

    // Compound block round trip.
    ExperimentConfig c = a;
    CompoundTailProblem p;
    p.exp_increment = LogNormal{0.05, 0.09};
    p.exp_shift = Constant{std::exp(0.5)};
    p.upsilon = 0.15;
    p.f = RegVaryingFactor{1.0 - std::exp(-0.15), 0.0};
    c.compound = p;
    const std::string cs1 = serialize_config(c);
    const ExperimentConfig c2 = parse_config(cs1);
    REQUIRE(c2.compound.has_value());
    CHECK(c2.compound->upsilon == 0.15);
    CHECK(serialize_config(c2) == cs1);
}

TEST_CASE("schema problems raise config errors") {
    CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1,2,3]"), ConfigError);
    CHECK_THROWS_AS(parse_config("{}"), ConfigError); // missing model

    // Unknown model type / family / estimator / delay type.
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"type\": \"runoff\"",
                           "\"type\": \"bogus\"")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"family\": \"gamma\"",
                           "\"family\": \"weibull\"")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"mc\"", "\"importance\"")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"type\": \"table\"",
                           "\"type\": \"weibull\"")),
        ConfigError);

    // Missing required keys inside blocks.
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"shape\": 2.0, ", "")), ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"u\": [5.0, 10.0],", "")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc,
                           "\"estimators\": [\"mc\", \"asymptotic-runoff\"],",
                           "")),
        ConfigError);

    // Structural and range problems.
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"u\": [5.0, 10.0]",
                           "\"u\": [5.0, -1.0]")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"u\": [5.0, 10.0]", "\"u\": []")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc,
                           "\"estimators\": [\"mc\", \"asymptotic-runoff\"]",
                           "\"estimators\": []")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"replications\": 4000",
                           "\"replications\": 0")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"workers\": 2", "\"workers\": 9999")),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"lambda\": 2.5", "\"lambda\": -1")),
        ConfigError);

    // Model validation failures surface as config errors too.
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"probs\": [0.5, 0.5]",
                           "\"probs\": [0.5, 0.2]")),
        ConfigError);

    // Bad transition rule string.
    CHECK_THROWS_AS(
        parse_config(patch(kRunoffDoc, "\"lambda\": 2.5",
                           "\"lambda\": 2.5, \"rule\": \"mid_year\"")),
        ConfigError);
}

TEST_CASE("estimator / model compatibility is enforced when running") {
    ExperimentConfig g = parse_config(kGrowthDoc);
    for (const char* bad : {"hybrid", "asymptotic-runoff", "decomposition"}) {
        ExperimentConfig c = g;
        c.estimators = {bad};
        CHECK_THROWS_AS(run_experiment(c, false), ConfigError);
    }
    ExperimentConfig r = parse_config(kRunoffDoc);
    r.estimators = {"asymptotic-growth"};
    CHECK_THROWS_AS(run_experiment(r, false), ConfigError);
    r.estimators = {"compound-tail"}; // no compound block present
    CHECK_THROWS_AS(run_experiment(r, false), ConfigError);
}

TEST_CASE("bundled presets describe the benchmark tables") {
    const ExperimentConfig t1 = preset_table51();
    const auto* m1 = std::get_if<RunoffModelSpec>(&t1.model);
    REQUIRE(m1 != nullptr);
    CHECK(m1->lambda == 0.1);
    CHECK(t1.u_grid == std::vector<double>{10.0, 50.0, 200.0});
    CHECK(t1.estimators ==
          std::vector<std::string>{"asymptotic-runoff", "mc"});
    CHECK(t1.mc.replications == 1000000);

    const ExperimentConfig t2 = preset_table52();
    const auto* m2 = std::get_if<RunoffModelSpec>(&t2.model);
    REQUIRE(m2 != nullptr);
    CHECK(m2->lambda == 100.0);
    CHECK(t2.u_grid == std::vector<double>{5000.0, 10000.0, 50000.0});
    CHECK(t2.estimators ==
          std::vector<std::string>{"asymptotic-runoff", "mc", "hybrid"});
    CHECK(t2.lambda0 == 0.1);

    // Presets are expressible in the schema.
    CHECK(serialize_config(parse_config(serialize_config(t1))) ==
          serialize_config(t1));
    CHECK(serialize_config(parse_config(serialize_config(t2))) ==
          serialize_config(t2));
}

TEST_CASE("experiment outputs: schema, determinism, ratios, trace") {
    const char* doc = R"({
      "model": {
        "type": "runoff",
        "lambda": 0.1,
        "ir": {
          "type": "independent",
          "inflation_factor": {"family": "constant", "value": 1.0512710963760241},
          "return_factor": {"family": "lognormal", "mean_log": 0.1,
                            "var_log": 0.1}
        },
        "claim_size": {"family": "exponential", "mean": 1.0},
        "xi": {"type": "deterministic_exp", "phi": 0.1}
      },
      "u": [5.0, 10.0],
      "estimators": ["mc", "hybrid", "asymptotic-runoff", "decomposition"],
      "mc": {"replications": 2000},
      "n_max": 60
    })";
    const ExperimentConfig cfg = parse_config(doc);
    const ExperimentOutput out1 = run_experiment(cfg, true);
    const ExperimentOutput out2 = run_experiment(cfg, true);

    // Text report and trace: byte-identical reruns.
    CHECK(out1.report == out2.report);
    CHECK(out1.trace == out2.trace);

    // CSV: fixed header, 10 fields per row, identical except the trailing
    // wall-clock column.
    const auto l1 = lines_of(out1.csv);
    const auto l2 = lines_of(out2.csv);
    REQUIRE(l1.size() == l2.size());
    REQUIRE(l1.size() == 1 + 2 * 4); // header + |u| x |estimators|
    CHECK(l1.front() == csv_header());
    CHECK(l1.front() ==
          "u,lambda,method,estimate,std_error,ci_lo,ci_hi,reps,seed,wall_ms");
    for (std::size_t i = 1; i < l1.size(); ++i) {
        CHECK(fields_of(l1[i]).size() == 10);
        CHECK(drop_last_field(l1[i]) == drop_last_field(l2[i]));
        const double wall = std::stod(fields_of(l1[i]).back());
        CHECK(wall >= 0.0);
    }

    // Method column spells out what ran; reps column reflects the branch.
    const auto f1 = fields_of(l1[1]);
    CHECK(std::stod(f1[0]) == 5.0);
    CHECK(std::stod(f1[1]) == 0.1);
    CHECK(f1[2] == "mc");
    CHECK(f1[7] == "2000");
    bool saw_decomposition = false;
    for (std::size_t i = 1; i < l1.size(); ++i) {
        const auto f = fields_of(l1[i]);
        if (f[2] == "decomposition") {
            saw_decomposition = true;
            CHECK(f[7] == "0"); // analytic route: no sampling
        }
    }
    CHECK(saw_decomposition);

    // Report carries the seed line and the cross-method ratios.
    CHECK(out1.report.find("seed: 123456789") != std::string::npos);
    CHECK(out1.report.find("ratio mc/asymptotic u=5") != std::string::npos);
    CHECK(out1.report.find("ratio hybrid/mc u=10") != std::string::npos);

    // Trace: one path, year by year.
    const auto tl = lines_of(out1.trace);
    REQUIRE(tl.size() >= 2);
    CHECK(tl.front() == "year,capital,y_value,claim_count,claim_cost");
    CHECK(fields_of(tl[1]).front() == "1");

    // No trace unless requested.
    CHECK(run_experiment(cfg, false).trace.empty());
}

TEST_CASE("tail scan: slope of the log-log decay, run-off only") {
    const char* doc = R"({
      "model": {
        "type": "runoff",
        "lambda": 0.1,
        "ir": {
          "type": "independent",
          "inflation_factor": {"family": "constant", "value": 1.0512710963760241},
          "return_factor": {"family": "lognormal", "mean_log": 0.1,
                            "var_log": 0.1}
        },
        "claim_size": {"family": "exponential", "mean": 1.0},
        "xi": {"type": "deterministic_exp", "phi": 0.1}
      },
      "u": [10.0, 20.0, 50.0],
      "estimators": ["mc"],
      "mc": {"replications": 50000}
    })";
    const ExperimentConfig cfg = parse_config(doc);
    const TailOutput t = tail_experiment(cfg);
    const auto lines = lines_of(t.csv);
    REQUIRE(lines.size() == 4);
    CHECK(lines.front() == "u,mc_estimate,asymptotic,ratio");
    REQUIRE(t.has_slope);
    CHECK(t.slope < -1.5);
    CHECK(t.slope > -2.6);
    const auto rho_pos = t.report.find("decay_exponent_rho: ");
    REQUIRE(rho_pos != std::string::npos);
    CHECK(std::stod(t.report.substr(rho_pos + 20)) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(t.report.find("tail_slope: ") != std::string::npos);

    // Growth models have no u^-rho tail scan of this kind.
    const ExperimentConfig g = parse_config(kGrowthDoc);
    try {
        tail_experiment(g);
        FAIL("expected a violation");
    } catch (const HypothesisViolation& v) {
        CHECK(v.check == "model_mode");
    }
}

TEST_CASE("command line: exit codes and file outputs") {
    const auto cfg_path = tmp_file("ruinsim_cfg_ok.json");
    const auto csv_path = tmp_file("ruinsim_out.csv");
    const auto rep_path = tmp_file("ruinsim_out.txt");
    write_text(cfg_path, R"({
      "model": {
        "type": "runoff",
        "lambda": 0.1,
        "ir": {
          "type": "independent",
          "inflation_factor": {"family": "constant", "value": 1.0512710963760241},
          "return_factor": {"family": "lognormal", "mean_log": 0.1,
                            "var_log": 0.1}
        },
        "claim_size": {"family": "exponential", "mean": 1.0},
        "xi": {"type": "deterministic_exp", "phi": 0.1}
      },
      "u": [10.0],
      "estimators": ["asymptotic-runoff", "mc"],
      "mc": {"replications": 500}
    })");

    CHECK(cli("run " + cfg_path.string() + " --out " + csv_path.string() +
              " --report " + rep_path.string()) == 0);
    const auto lines = lines_of(read_text(csv_path));
    REQUIRE(lines.size() == 3);
    CHECK(lines.front() == csv_header());
    CHECK(read_text(rep_path).find("toolkit_version") != std::string::npos);

    // Replication and seed overrides land in the CSV.
    CHECK(cli("run " + cfg_path.string() + " --reps 100 --seed 77 --out " +
              csv_path.string() + " --report " + rep_path.string()) == 0);
    bool saw_mc = false;
    for (const auto& line : lines_of(read_text(csv_path))) {
        const auto f = fields_of(line);
        if (f.size() == 10 && f[2] == "mc") {
            saw_mc = true;
            CHECK(f[7] == "100");
            CHECK(f[8] == "77");
        }
    }
    CHECK(saw_mc);

    // Bundled preset at a reduced budget.
    CHECK(cli("reproduce table5.1 --reps 200 --out " + csv_path.string() +
              " --report " + rep_path.string()) == 0);
    CHECK(lines_of(read_text(csv_path)).size() == 1 + 3 * 2);

    // Tail subcommand.
    CHECK(cli("tail " + cfg_path.string() + " --reps 20000 --out " +
              csv_path.string() + " --report " + rep_path.string()) == 0);
    CHECK(lines_of(read_text(csv_path)).front() ==
          "u,mc_estimate,asymptotic,ratio");

    // Exit code 2: unusable configs and arguments.
    CHECK(cli("run " + tmp_file("ruinsim_no_such.json").string()) == 2);
    const auto bad_path = tmp_file("ruinsim_cfg_bad.json");
    write_text(bad_path, "{ this is not json");
    CHECK(cli("run " + bad_path.string()) == 2);
    CHECK(cli("reproduce table9.9") == 2);
    CHECK(cli("") == 2);

    // Exit code 3: hypothesis violations.
    const auto rule_path = tmp_file("ruinsim_cfg_rule.json");
    write_text(rule_path,
               patch(read_text(cfg_path), "\"lambda\": 0.1",
                     "\"lambda\": 0.1, \"rule\": \"claims_end_of_year\""));
    CHECK(cli("run " + rule_path.string()) == 3);

    // --version reports and exits cleanly.
    CHECK(cli("--version") == 0);
}
