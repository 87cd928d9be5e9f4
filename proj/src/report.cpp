#include "ruinsim/report.hpp"

#include <cstdio>

namespace ruin {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

std::string csv_header() {
    return "u,lambda,method,estimate,std_error,ci_lo,ci_hi,reps,seed,wall_ms";
}

std::string csv_row(const EstimateReport& r) {
    std::string row;
    row += fmt_double(r.u);
    row += ',';
    row += fmt_double(r.lambda);
    row += ',';
    row += r.method;
    row += ',';
    row += fmt_double(r.estimate);
    row += ',';
    row += fmt_double(r.std_error);
    row += ',';
    row += fmt_double(r.ci_lo);
    row += ',';
    row += fmt_double(r.ci_hi);
    row += ',';
    row += std::to_string(r.replications);
    row += ',';
    row += std::to_string(r.seed);
    row += ',';
    row += fmt_fixed(r.wall_ms, 3);
    return row;
}

std::string text_block(const EstimateReport& r) {
    std::string out;
    out += "method: " + r.method + '\n';
    out += "u: " + fmt_double(r.u) + '\n';
    out += "lambda: " + fmt_double(r.lambda) + '\n';
    out += "estimate: " + fmt_double(r.estimate) + '\n';
    out += "std_error: " + fmt_double(r.std_error) + '\n';
    out += "ci95: [" + fmt_double(r.ci_lo) + ", " + fmt_double(r.ci_hi) + "]\n";
    out += "replications: " + std::to_string(r.replications) + '\n';
    out += "seed: " + std::to_string(r.seed) + '\n';
    if (r.horizon > 0) out += "horizon_years: " + std::to_string(r.horizon) + '\n';
    if (r.bias_bound > 0.0)
        out += "truncation_bias_bound: " + fmt_double(r.bias_bound) + '\n';
    for (const auto& [key, value] : r.extras)
        out += key + ": " + fmt_double(value) + '\n';
    for (const auto& c : r.checks) {
        out += "check " + c.name + ": ";
        out += c.passed ? "pass" : "FAIL";
        if (!c.detail.empty()) out += " (" + c.detail + ")";
        out += '\n';
    }
    // No timings here: text reports must be byte-identical across reruns
    // (wall time lives in the CSV only).
    return out;
}

} // namespace ruin
