#pragma once
// JSON experiment configuration: one document names a model, the estimators
// to run, the u / lambda grids and the Monte Carlo budget. The orchestrator
// turns a parsed config into a fixed-schema CSV, a key-value text report and
// an optional per-year trace of the first replication's path.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ruinsim/estimators.hpp"
#include "ruinsim/model.hpp"
#include "ruinsim/report.hpp"

namespace ruin {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Schema problem (malformed document, unknown family, invalid field values,
// unusable estimator/model combination). The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct OutputPaths {
    std::string csv;    // empty: write to stdout
    std::string report; // empty: write to stdout
    std::string trace;  // empty: no trace requested
};

struct ExperimentConfig {
    std::variant<GrowthModelSpec, RunoffModelSpec> model;
    std::vector<double> u_grid;
    std::vector<double> lambda_grid; // defaults to the model's lambda
    std::vector<std::string> estimators;
    McConfig mc;
    double lambda0 = 0.1;  // hybrid switch intensity
    int n_max = 400;       // decomposition series length
    std::uint64_t decomposition_samples = 200000;
    GoldieMcConfig goldie; // tail-constant sampler budget (growth models)
    std::optional<CompoundTailProblem> compound;
    OutputPaths output;
};

// Parses and validates a JSON document. Throws ConfigError on any schema or
// validation problem.
ExperimentConfig parse_config(const std::string& json_text);

// Canonical JSON rendering with every default materialized; parsing the
// result reproduces the same in-memory experiment.
std::string serialize_config(const ExperimentConfig& cfg);

// Bundled experiment presets.
ExperimentConfig preset_table51(); // lambda 0.1, u {10, 50, 200}
ExperimentConfig preset_table52(); // lambda 100, u {5e3, 1e4, 5e4}, hybrid

struct ExperimentOutput {
    std::string csv;
    std::string report;
    std::string trace; // empty unless requested
};

// Runs every (lambda, u, estimator) cell. Throws ConfigError for semantic
// config problems and HypothesisViolation when an estimator's regime checks
// reject the model; the CLI maps those to exit codes 2 and 3.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool want_trace);

struct TailOutput {
    std::string csv; // u, mc_estimate, asymptotic, ratio
    std::string report;
    bool has_slope = false;
    double slope = 0.0; // OLS slope of log estimate against log u
};

// Log-log tail scan over the u grid. Defined for run-off models only; a
// growth model raises HypothesisViolation("model_mode").
TailOutput tail_experiment(const ExperimentConfig& cfg);

} // namespace ruin
