#include "ruinsim/distributions.hpp"

#include <cmath>
#include <stdexcept>

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

void check_discrete(const DiscreteWeighted& d) {
    if (d.values.empty() || d.values.size() != d.probs.size())
        throw std::invalid_argument(
            "DiscreteWeighted: values/probs must be non-empty and equal size");
    double total = 0.0;
    for (double p : d.probs) {
        if (!(p >= 0.0))
            throw std::invalid_argument("DiscreteWeighted: negative probability");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("DiscreteWeighted: probabilities must sum to 1");
}

// log sum_i p_i e^{t(v_i)} over positive-mass atoms with the largest exponent
// factored out, so extreme arguments (e.g. deep Legendre probes) cannot
// overflow exp.
template <class ExpFn>
double discrete_log_expsum(const DiscreteWeighted& x, ExpFn t) {
    double m = -kInf;
    for (std::size_t i = 0; i < x.values.size(); ++i)
        if (x.probs[i] > 0.0) m = std::max(m, t(x.values[i]));
    double s = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i)
        if (x.probs[i] > 0.0) s += x.probs[i] * std::exp(t(x.values[i]) - m);
    return m + std::log(s);
}

// sum_i w_i g(v_i) / sum_i w_i with w_i = p_i e^{t(v_i)}, same shift trick.
template <class ExpFn, class ValFn>
double discrete_expsum_mean(const DiscreteWeighted& x, ExpFn t, ValFn g) {
    double m = -kInf;
    for (std::size_t i = 0; i < x.values.size(); ++i)
        if (x.probs[i] > 0.0) m = std::max(m, t(x.values[i]));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        if (x.probs[i] <= 0.0) continue;
        const double w = x.probs[i] * std::exp(t(x.values[i]) - m);
        num += w * g(x.values[i]);
        den += w;
    }
    return num / den;
}

// Expectation of w(x) under the log-normal law by quadrature over the
// underlying normal, used where no closed form exists (negative-argument CGF).
double lognormal_expect(const LogNormal& d,
                        const std::function<double(double)>& w) {
    const double sd = std::sqrt(d.var_log);
    auto integrand = [&](double z) {
        return w(std::exp(d.mean_log + sd * z)) * normal_pdf(z);
    };
    return integrate(integrand, -14.0, 14.0, 1e-14, 1e-12).value;
}

} // namespace

void validate(const DistributionSpec& d) {
    std::visit(overload{
                   [](const Constant&) {},
                   [](const LogNormal& x) {
                       if (!(x.var_log > 0.0))
                           throw std::invalid_argument(
                               "LogNormal: var_log must be positive");
                   },
                   [](const Exponential& x) {
                       if (!(x.mean > 0.0))
                           throw std::invalid_argument(
                               "Exponential: mean must be positive");
                   },
                   [](const GammaDist& x) {
                       if (!(x.shape > 0.0) || !(x.rate > 0.0))
                           throw std::invalid_argument(
                               "GammaDist: shape and rate must be positive");
                   },
                   [](const DiscreteWeighted& x) { check_discrete(x); },
               },
               d);
}

double mean(const DistributionSpec& d) {
    return std::visit(
        overload{
            [](const Constant& x) { return x.value; },
            [](const LogNormal& x) {
                return std::exp(x.mean_log + 0.5 * x.var_log);
            },
            [](const Exponential& x) { return x.mean; },
            [](const GammaDist& x) { return x.shape / x.rate; },
            [](const DiscreteWeighted& x) {
                double m = 0.0;
                for (std::size_t i = 0; i < x.values.size(); ++i)
                    m += x.probs[i] * x.values[i];
                return m;
            },
        },
        d);
}

double support_min(const DistributionSpec& d) {
    return std::visit(overload{
                          [](const Constant& x) { return x.value; },
                          [](const LogNormal&) { return 0.0; },
                          [](const Exponential&) { return 0.0; },
                          [](const GammaDist&) { return 0.0; },
                          [](const DiscreteWeighted& x) {
                              double lo = kInf;
                              for (std::size_t i = 0; i < x.values.size(); ++i)
                                  if (x.probs[i] > 0.0)
                                      lo = std::min(lo, x.values[i]);
                              return lo;
                          },
                      },
                      d);
}

double support_max(const DistributionSpec& d) {
    return std::visit(overload{
                          [](const Constant& x) { return x.value; },
                          [](const LogNormal&) { return kInf; },
                          [](const Exponential&) { return kInf; },
                          [](const GammaDist&) { return kInf; },
                          [](const DiscreteWeighted& x) {
                              double hi = -kInf;
                              for (std::size_t i = 0; i < x.values.size(); ++i)
                                  if (x.probs[i] > 0.0)
                                      hi = std::max(hi, x.values[i]);
                              return hi;
                          },
                      },
                      d);
}

bool is_degenerate(const DistributionSpec& d) {
    if (std::holds_alternative<Constant>(d)) return true;
    if (const auto* dw = std::get_if<DiscreteWeighted>(&d)) {
        // degenerate iff all atoms with positive mass coincide
        double atom = 0.0;
        bool seen = false;
        for (std::size_t i = 0; i < dw->values.size(); ++i) {
            if (dw->probs[i] <= 0.0) continue;
            if (seen && dw->values[i] != atom) return false;
            atom = dw->values[i];
            seen = true;
        }
        return true;
    }
    return false;
}

bool has_positive_support(const DistributionSpec& d) {
    return support_min(d) > 0.0 ||
           (support_min(d) == 0.0 && !std::holds_alternative<Constant>(d) &&
            !std::holds_alternative<DiscreteWeighted>(d));
}

bool is_continuous(const DistributionSpec& d) {
    return std::holds_alternative<LogNormal>(d) ||
           std::holds_alternative<Exponential>(d) ||
           std::holds_alternative<GammaDist>(d);
}

double sample(const DistributionSpec& d, RngStream& rng) {
    return std::visit(
        overload{
            [](const Constant& x) { return x.value; }, // consumes no draws
            [&](const LogNormal& x) {
                return std::exp(x.mean_log + std::sqrt(x.var_log) * rng.normal());
            },
            [&](const Exponential& x) { return rng.exponential(x.mean); },
            [&](const GammaDist& x) { return rng.gamma(x.shape, x.rate); },
            [&](const DiscreteWeighted& x) {
                const double u = rng.uniform01(); // exactly one draw
                double cum = 0.0;
                for (std::size_t i = 0; i + 1 < x.values.size(); ++i) {
                    cum += x.probs[i];
                    if (u <= cum) return x.values[i];
                }
                return x.values.back();
            },
        },
        d);
}

namespace {

void require_positive_support(const DistributionSpec& d) {
    if (!has_positive_support(d))
        throw std::domain_error(
            "log_moment: distribution support touches (-inf, 0]");
}

} // namespace

AlphaDomain log_moment_domain(const DistributionSpec& d) {
    return std::visit(
        overload{
            [](const Constant&) { return AlphaDomain{}; },
            [](const LogNormal&) { return AlphaDomain{}; },
            [](const Exponential&) {
                return AlphaDomain{-1.0, kInf, false, false};
            },
            [](const GammaDist& x) {
                return AlphaDomain{-x.shape, kInf, false, false};
            },
            [](const DiscreteWeighted&) { return AlphaDomain{}; },
        },
        d);
}

double log_moment(const DistributionSpec& d, double alpha) {
    require_positive_support(d);
    return std::visit(
        overload{
            [&](const Constant& x) { return alpha * std::log(x.value); },
            [&](const LogNormal& x) {
                return x.mean_log * alpha + 0.5 * x.var_log * alpha * alpha;
            },
            [&](const Exponential& x) {
                if (alpha <= -1.0) return kInf;
                return alpha * std::log(x.mean) + std::lgamma(alpha + 1.0);
            },
            [&](const GammaDist& x) {
                if (alpha <= -x.shape) return kInf;
                return std::lgamma(x.shape + alpha) - std::lgamma(x.shape) -
                       alpha * std::log(x.rate);
            },
            [&](const DiscreteWeighted& x) {
                return discrete_log_expsum(
                    x, [&](double v) { return alpha * std::log(v); });
            },
        },
        d);
}

double log_moment_derivative(const DistributionSpec& d, double alpha) {
    require_positive_support(d);
    return std::visit(
        overload{
            [&](const Constant& x) { return std::log(x.value); },
            [&](const LogNormal& x) { return x.mean_log + x.var_log * alpha; },
            [&](const Exponential& x) {
                if (alpha <= -1.0)
                    throw std::domain_error("log_moment_derivative: outside domain");
                return std::log(x.mean) + digamma(alpha + 1.0);
            },
            [&](const GammaDist& x) {
                if (alpha <= -x.shape)
                    throw std::domain_error("log_moment_derivative: outside domain");
                return digamma(x.shape + alpha) - std::log(x.rate);
            },
            [&](const DiscreteWeighted& x) {
                return discrete_expsum_mean(
                    x, [&](double v) { return alpha * std::log(v); },
                    [](double v) { return std::log(v); });
            },
        },
        d);
}

AlphaDomain cgf_domain(const DistributionSpec& d) {
    return std::visit(
        overload{
            [](const Constant&) { return AlphaDomain{}; },
            [](const LogNormal&) {
                return AlphaDomain{-kInf, 0.0, false, true};
            },
            [](const Exponential& x) {
                return AlphaDomain{-kInf, 1.0 / x.mean, false, false};
            },
            [](const GammaDist& x) {
                return AlphaDomain{-kInf, x.rate, false, false};
            },
            [](const DiscreteWeighted&) { return AlphaDomain{}; },
        },
        d);
}

double cgf(const DistributionSpec& d, double alpha) {
    return std::visit(
        overload{
            [&](const Constant& x) { return alpha * x.value; },
            [&](const LogNormal& x) -> double {
                if (alpha > 0.0) return kInf; // log-normal has no MGF
                if (alpha == 0.0) return 0.0;
                return std::log(lognormal_expect(
                    x, [&](double v) { return std::exp(alpha * v); }));
            },
            [&](const Exponential& x) {
                if (alpha >= 1.0 / x.mean) return kInf;
                return -std::log1p(-alpha * x.mean);
            },
            [&](const GammaDist& x) {
                if (alpha >= x.rate) return kInf;
                return -x.shape * std::log1p(-alpha / x.rate);
            },
            [&](const DiscreteWeighted& x) {
                return discrete_log_expsum(
                    x, [&](double v) { return alpha * v; });
            },
        },
        d);
}

double cgf_derivative(const DistributionSpec& d, double alpha) {
    return std::visit(
        overload{
            [&](const Constant& x) { return x.value; },
            [&](const LogNormal& x) -> double {
                if (alpha > 0.0)
                    throw std::domain_error("cgf_derivative: outside domain");
                const double den = (alpha == 0.0)
                                       ? 1.0
                                       : lognormal_expect(x, [&](double v) {
                                             return std::exp(alpha * v);
                                         });
                const double num = lognormal_expect(
                    x, [&](double v) { return v * std::exp(alpha * v); });
                return num / den;
            },
            [&](const Exponential& x) {
                if (alpha >= 1.0 / x.mean)
                    throw std::domain_error("cgf_derivative: outside domain");
                return x.mean / (1.0 - alpha * x.mean);
            },
            [&](const GammaDist& x) {
                if (alpha >= x.rate)
                    throw std::domain_error("cgf_derivative: outside domain");
                return x.shape / (x.rate - alpha);
            },
            [&](const DiscreteWeighted& x) {
                return discrete_expsum_mean(
                    x, [&](double v) { return alpha * v; },
                    [](double v) { return v; });
            },
        },
        d);
}

double moment_index(const DistributionSpec&) {
    // Every built-in family has finite moments of all positive orders.
    return kInf;
}

double pdf(const DistributionSpec& d, double x) {
    return std::visit(
        overload{
            [](const Constant&) -> double {
                throw std::domain_error("pdf: point mass has no density");
            },
            [&](const LogNormal& p) -> double {
                if (x <= 0.0) return 0.0;
                const double z = std::log(x) - p.mean_log;
                return std::exp(-0.5 * z * z / p.var_log) /
                       (x * std::sqrt(2.0 * M_PI * p.var_log));
            },
            [&](const Exponential& p) -> double {
                if (x < 0.0) return 0.0;
                return std::exp(-x / p.mean) / p.mean;
            },
            [&](const GammaDist& p) -> double {
                if (x < 0.0) return 0.0;
                if (x == 0.0) return p.shape < 1.0 ? kInf : (p.shape == 1.0 ? p.rate : 0.0);
                return std::exp(p.shape * std::log(p.rate) +
                                (p.shape - 1.0) * std::log(x) - p.rate * x -
                                std::lgamma(p.shape));
            },
            [](const DiscreteWeighted&) -> double {
                throw std::domain_error("pdf: discrete law has no density");
            },
        },
        d);
}

double survival(const DistributionSpec& d, double x) {
    return std::visit(
        overload{
            [&](const Constant& p) -> double {
                return p.value > x ? 1.0 : 0.0;
            },
            [&](const LogNormal& p) -> double {
                if (x <= 0.0) return 1.0;
                return normal_sf((std::log(x) - p.mean_log) /
                                 std::sqrt(p.var_log));
            },
            [&](const Exponential& p) -> double {
                if (x <= 0.0) return 1.0;
                return std::exp(-x / p.mean);
            },
            [&](const GammaDist& p) -> double {
                if (x <= 0.0) return 1.0;
                return gamma_q(p.shape, p.rate * x);
            },
            [&](const DiscreteWeighted& p) -> double {
                double s = 0.0;
                for (std::size_t k = 0; k < p.values.size(); ++k)
                    if (p.values[k] > x) s += p.probs[k];
                return s;
            },
        },
        d);
}

double laplace(const DistributionSpec& d, double t) {
    if (t < 0.0) throw std::invalid_argument("laplace: need t >= 0");
    return std::visit(
        overload{
            [&](const Constant& x) { return std::exp(-t * x.value); },
            [&](const LogNormal& x) {
                return lognormal_expect(
                    x, [&](double v) { return std::exp(-t * v); });
            },
            [&](const Exponential& x) { return 1.0 / (1.0 + t * x.mean); },
            [&](const GammaDist& x) {
                return std::pow(x.rate / (x.rate + t), x.shape);
            },
            [&](const DiscreteWeighted& x) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.values.size(); ++i)
                    s += x.probs[i] * std::exp(-t * x.values[i]);
                return s;
            },
        },
        d);
}

double laplace_xweighted(const DistributionSpec& d, double t) {
    if (t < 0.0) throw std::invalid_argument("laplace_xweighted: need t >= 0");
    return std::visit(
        overload{
            [&](const Constant& x) { return x.value * std::exp(-t * x.value); },
            [&](const LogNormal& x) {
                return lognormal_expect(
                    x, [&](double v) { return v * std::exp(-t * v); });
            },
            [&](const Exponential& x) {
                const double s = 1.0 + t * x.mean;
                return x.mean / (s * s);
            },
            [&](const GammaDist& x) {
                return (x.shape / x.rate) *
                       std::pow(x.rate / (x.rate + t), x.shape + 1.0);
            },
            [&](const DiscreteWeighted& x) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.values.size(); ++i)
                    s += x.probs[i] * x.values[i] * std::exp(-t * x.values[i]);
                return s;
            },
        },
        d);
}

} // namespace ruin
