// Distribution specifications for model inputs, with exact sampling and
// analytic transform evaluation. log_moment / cgf return extended reals:
// +infinity outside the finite domain rather than raising.
#pragma once

#include <limits>
#include <variant>
#include <vector>

#include "ruinsim/rng.hpp"

namespace ruin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Constant {
    double value;
};

// X = e^N with N ~ Normal(mean_log, var_log); models positive factors such as
// (1+r) with log(1+r) Gaussian.
struct LogNormal {
    double mean_log;
    double var_log;
};

struct Exponential {
    double mean;
};

struct GammaDist {
    double shape;
    double rate;
};

struct DiscreteWeighted {
    std::vector<double> values;
    std::vector<double> probs;
};

using DistributionSpec =
    std::variant<Constant, LogNormal, Exponential, GammaDist, DiscreteWeighted>;

// Open-interval finiteness domain for a transform argument; the transform is
// finite on (lo, hi), +infinity beyond. hi_closed marks finiteness at hi too.
struct AlphaDomain {
    double lo = -kInf;
    double hi = kInf;
    bool lo_closed = false;
    bool hi_closed = false;
};

// Throws std::invalid_argument when parameters are out of range.
void validate(const DistributionSpec& d);

double mean(const DistributionSpec& d);
double support_min(const DistributionSpec& d);
double support_max(const DistributionSpec& d);
bool is_degenerate(const DistributionSpec& d);     // point mass?
bool has_positive_support(const DistributionSpec& d);
bool is_continuous(const DistributionSpec& d);     // abs. continuous law?

double sample(const DistributionSpec& d, RngStream& rng);

// log E X^alpha. Requires support in (0, inf); throws std::domain_error
// otherwise. Returns +inf outside the finite domain.
double log_moment(const DistributionSpec& d, double alpha);
double log_moment_derivative(const DistributionSpec& d, double alpha);
AlphaDomain log_moment_domain(const DistributionSpec& d);

// log E exp(alpha X). Returns +inf beyond the convergence abscissa.
double cgf(const DistributionSpec& d, double alpha);
double cgf_derivative(const DistributionSpec& d, double alpha);
AlphaDomain cgf_domain(const DistributionSpec& d);

// sup{alpha >= 0 : E X^alpha < inf}. All built-in families are light-tailed,
// so this is +inf; the hook exists so heavy-tailed families can be added
// without touching call sites.
double moment_index(const DistributionSpec& d);

// Density for the absolutely continuous families (LogNormal, Exponential,
// GammaDist); throws std::domain_error for Constant / DiscreteWeighted.
double pdf(const DistributionSpec& d, double x);

// Survival function P(X > x), exact for every family.
double survival(const DistributionSpec& d, double x);

// Laplace transform pieces used by exact mixed-Poisson report probabilities:
// E exp(-t X) and E[X exp(-t X)] for t >= 0 (quadrature for LogNormal).
double laplace(const DistributionSpec& d, double t);
double laplace_xweighted(const DistributionSpec& d, double t);

} // namespace ruin
