// Command-line front end: runs ruin-probability experiments from a JSON
// config, reproduces the bundled benchmark tables, and emits plot-ready tail
// scans. Exit codes: 0 success, 2 config/schema error, 3 hypothesis
// violation, 1 anything else.
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ruinsim/config.hpp"

namespace {

struct CliOverrides {
    bool paper_scale = false;
    std::optional<std::uint64_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out_csv;
    std::string out_report;
    std::string out_trace;
};

void add_common_flags(CLI::App* sub, CliOverrides* o, bool with_trace) {
    sub->add_flag("--paper-scale", o->paper_scale,
                  "use 10^7 replications instead of the default 10^6 "
                  "(ignored when --reps is given)");
    sub->add_option("--reps", o->reps, "override the replication count");
    sub->add_option("--seed", o->seed,
                    "override the base RNG seed (also reseeds the "
                    "fixed-point sampler)");
    sub->add_option("--workers", o->workers,
                    "worker threads for path simulation")
        ->check(CLI::Range(1, 4096));
    sub->add_option("--out", o->out_csv,
                    "write the CSV table here instead of stdout");
    sub->add_option("--report", o->out_report,
                    "write the text report here instead of stdout");
    if (with_trace)
        sub->add_option("--trace", o->out_trace,
                        "write a single-path year-by-year trace CSV here");
}

void apply_overrides(ruin::ExperimentConfig& cfg, const CliOverrides& o) {
    if (o.reps)
        cfg.mc.replications = *o.reps;
    else if (o.paper_scale)
        cfg.mc.replications = 10000000;
    if (o.seed) {
        cfg.mc.seed = *o.seed;
        cfg.goldie.seed = *o.seed;
    }
    if (o.workers) cfg.mc.workers = *o.workers;
    if (!o.out_csv.empty()) cfg.output.csv = o.out_csv;
    if (!o.out_report.empty()) cfg.output.report = o.out_report;
    if (!o.out_trace.empty()) cfg.output.trace = o.out_trace;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ruin::ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw ruin::ConfigError("cannot read config file: " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
    if (!out) throw std::runtime_error("cannot write output file: " + path);
}

// Empty path means stdout.
void deliver(const std::string& path, const std::string& text) {
    if (path.empty())
        std::cout << text;
    else
        write_file(path, text);
}

int run_command(const ruin::ExperimentConfig& cfg) {
    const bool want_trace = !cfg.output.trace.empty();
    const ruin::ExperimentOutput out = ruin::run_experiment(cfg, want_trace);
    deliver(cfg.output.csv, out.csv);
    if (cfg.output.csv.empty() && cfg.output.report.empty())
        std::cout << "\n";
    deliver(cfg.output.report, out.report);
    if (want_trace) write_file(cfg.output.trace, out.trace);
    return 0;
}

int tail_command(const ruin::ExperimentConfig& cfg) {
    const ruin::TailOutput out = ruin::tail_experiment(cfg);
    deliver(cfg.output.csv, out.csv);
    if (cfg.output.csv.empty() && cfg.output.report.empty())
        std::cout << "\n";
    deliver(cfg.output.report, out.report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ruinsim — Monte Carlo and asymptotic estimation of infinite-time "
        "ruin probabilities under inflation, stochastic investment returns, "
        "and growing or running-off business volume"};
    app.set_version_flag("--version", ruin::kToolkitVersion);
    app.require_subcommand(1);

    std::string run_config_path;
    CliOverrides run_flags;
    CLI::App* run_sub =
        app.add_subcommand("run", "run the experiment described by a JSON "
                                  "config and emit CSV + text report");
    run_sub->add_option("config", run_config_path, "path to the JSON config")
        ->required();
    add_common_flags(run_sub, &run_flags, /*with_trace=*/true);

    std::string preset_name;
    CliOverrides repro_flags;
    CLI::App* repro_sub = app.add_subcommand(
        "reproduce", "run a bundled benchmark preset (table5.1 | table5.2)");
    repro_sub
        ->add_option("preset", preset_name,
                     "preset name: table5.1 or table5.2")
        ->required();
    add_common_flags(repro_sub, &repro_flags, /*with_trace=*/false);

    std::string tail_config_path;
    CliOverrides tail_flags;
    CLI::App* tail_sub = app.add_subcommand(
        "tail", "scan the u grid of a run-off config and emit "
                "(u, mc, asymptotic, ratio) rows plus the fitted log-log "
                "slope");
    tail_sub
        ->add_option("config", tail_config_path, "path to the JSON config")
        ->required();
    add_common_flags(tail_sub, &tail_flags, /*with_trace=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_sub->parsed()) {
            ruin::ExperimentConfig cfg =
                ruin::parse_config(read_file(run_config_path));
            apply_overrides(cfg, run_flags);
            return run_command(cfg);
        }
        if (repro_sub->parsed()) {
            ruin::ExperimentConfig cfg;
            if (preset_name == "table5.1" || preset_name == "table51")
                cfg = ruin::preset_table51();
            else if (preset_name == "table5.2" || preset_name == "table52")
                cfg = ruin::preset_table52();
            else
                throw ruin::ConfigError("unknown preset '" + preset_name +
                                        "' (expected table5.1 or table5.2)");
            apply_overrides(cfg, repro_flags);
            return run_command(cfg);
        }
        // tail
        ruin::ExperimentConfig cfg =
            ruin::parse_config(read_file(tail_config_path));
        apply_overrides(cfg, tail_flags);
        return tail_command(cfg);
    } catch (const ruin::HypothesisViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ruin::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
