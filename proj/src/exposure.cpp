#include "ruinsim/exposure.hpp"

#include <cmath>
#include <stdexcept>

#include "ruinsim/quadrature.hpp"
#include "ruinsim/special.hpp"

namespace ruin {

double RegVaryingFactor::operator()(double x) const {
    return coeff * std::pow(x, power);
}

namespace {

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

} // namespace

void validate(const DelayModel& g) {
    std::visit(overload{
                   [](const GammaDelay& d) {
                       if (!(d.shape > 0.0) || !(d.rate > 0.0))
                           throw std::invalid_argument(
                               "GammaDelay: shape and rate must be positive");
                   },
                   [](const TabulatedDelay& d) {
                       if (d.x.size() < 2 || d.x.size() != d.cdf.size())
                           throw std::invalid_argument(
                               "TabulatedDelay: need matching knot arrays");
                       if (d.x.front() != 0.0 || d.cdf.front() != 0.0)
                           throw std::invalid_argument(
                               "TabulatedDelay: must start at (0, 0)");
                       if (std::fabs(d.cdf.back() - 1.0) > 1e-12)
                           throw std::invalid_argument(
                               "TabulatedDelay: cdf must end at 1");
                       for (std::size_t i = 1; i < d.x.size(); ++i)
                           if (d.x[i] <= d.x[i - 1] || d.cdf[i] < d.cdf[i - 1])
                               throw std::invalid_argument(
                                   "TabulatedDelay: knots must be monotone");
                       if (!(d.phi > 0.0) || !(d.h.coeff > 0.0))
                           throw std::invalid_argument(
                               "TabulatedDelay: need positive tail parameters");
                   },
               },
               g);
}

double delay_cdf(const DelayModel& g, double x) {
    return std::visit(
        overload{
            [&](const GammaDelay& d) {
                return x <= 0.0 ? 0.0 : gamma_p(d.shape, d.rate * x);
            },
            [&](const TabulatedDelay& d) {
                if (x <= d.x.front()) return 0.0;
                if (x >= d.x.back()) return 1.0;
                std::size_t i = 1;
                while (d.x[i] < x) ++i;
                const double w = (x - d.x[i - 1]) / (d.x[i] - d.x[i - 1]);
                return d.cdf[i - 1] + w * (d.cdf[i] - d.cdf[i - 1]);
            },
        },
        g);
}

double delay_phi(const DelayModel& g) {
    return std::visit(overload{
                          [](const GammaDelay& d) { return d.rate; },
                          [](const TabulatedDelay& d) { return d.phi; },
                      },
                      g);
}

RegVaryingFactor delay_h(const DelayModel& g) {
    return std::visit(
        overload{
            [](const GammaDelay& d) {
                // 1 - G(x) ~ (rate*x)^{shape-1} e^{-rate*x} / Gamma(shape)
                return RegVaryingFactor{
                    std::pow(d.rate, d.shape - 1.0) /
                        std::exp(std::lgamma(d.shape)),
                    d.shape - 1.0};
            },
            [](const TabulatedDelay& d) { return d.h; },
        },
        g);
}

double delay_weight(const DelayModel& g, int k) {
    if (k < 1) throw std::invalid_argument("delay_weight: need k >= 1");
    auto integrand = [&](double s) {
        return delay_cdf(g, k + 1.0 - s) - delay_cdf(g, k - s);
    };
    return integrate(integrand, 0.0, 1.0, 1e-12, 0.0).value;
}

std::vector<double> delay_weights(const DelayModel& g, int k_max) {
    std::vector<double> out;
    out.reserve(k_max);
    for (int k = 1; k <= k_max; ++k) out.push_back(delay_weight(g, k));
    return out;
}

void validate(const RunoffExposure& e) {
    if (e.d < 0) throw std::invalid_argument("RunoffExposure: d must be >= 0");
    if (static_cast<int>(e.pi.size()) != e.d + 1)
        throw std::invalid_argument("RunoffExposure: need d+1 volume entries");
    for (double p : e.pi)
        if (!(p > 0.0))
            throw std::invalid_argument("RunoffExposure: volumes must be positive");
    if (std::fabs(e.pi.back() - 1.0) > 1e-12)
        throw std::invalid_argument("RunoffExposure: pi_0 must equal 1");
    validate(e.dist_q);
    if (!has_positive_support(e.dist_q))
        throw std::invalid_argument("RunoffExposure: q must be positive");
    if (std::fabs(mean(e.dist_q) - 1.0) > 1e-9)
        throw std::invalid_argument("RunoffExposure: q must have mean 1");
    validate(e.delay);
}

void ensure_weights(RunoffExposure& e, int k_max) {
    if (e.weights && static_cast<int>(e.weights->size()) >= k_max) return;
    auto w = std::make_shared<std::vector<double>>(
        e.weights ? *e.weights : std::vector<double>{});
    for (int k = static_cast<int>(w->size()) + 1; k <= k_max; ++k)
        w->push_back(delay_weight(e.delay, k));
    e.weights = std::move(w);
}

namespace {

double weight_at(const RunoffExposure& e, int k) {
    if (k < 1) throw std::invalid_argument("exposure: weight index k < 1");
    if (!e.weights || static_cast<int>(e.weights->size()) < k)
        throw std::logic_error("exposure: call ensure_weights first");
    return (*e.weights)[k - 1];
}

} // namespace

double xi_from_exposure(const RunoffExposure& e, int n,
                        const std::vector<double>& q) {
    if (n < 1) throw std::invalid_argument("xi_from_exposure: need n >= 1");
    if (q.size() != e.pi.size())
        throw std::invalid_argument("xi_from_exposure: q size mismatch");
    double xi = 0.0;
    for (int j = 0; j <= e.d; ++j) {
        const int m = j - e.d; // year index in -d..0
        xi += e.pi[j] * weight_at(e, n - m) * q[j];
    }
    return xi;
}

double mean_xi(const RunoffExposure& e, int n) {
    double xi = 0.0;
    for (int j = 0; j <= e.d; ++j) {
        const int m = j - e.d;
        xi += e.pi[j] * weight_at(e, n - m);
    }
    return xi;
}

RegVaryingFactor report_rate_factor(const RunoffExposure& e) {
    const double phi = delay_phi(e.delay);
    double vol = 0.0;
    for (int j = 0; j <= e.d; ++j) {
        const int m = j - e.d;
        vol += e.pi[j] * std::exp(m * phi);
    }
    const double c =
        (std::exp(phi) - 1.0) * (1.0 - std::exp(-phi)) * vol / phi;
    RegVaryingFactor h = delay_h(e.delay);
    return RegVaryingFactor{c * h.coeff, h.power};
}

double asymptotic_report_rate(const RunoffExposure& e, double lambda, int n) {
    if (!(lambda > 0.0) || n < 1)
        throw std::invalid_argument("asymptotic_report_rate: bad arguments");
    const RegVaryingFactor f = report_rate_factor(e);
    return lambda * f(static_cast<double>(n)) *
           std::exp(-static_cast<double>(n) * delay_phi(e.delay));
}

double exact_single_report_prob(const RunoffExposure& e, double lambda, int n) {
    if (!(lambda > 0.0) || n < 1)
        throw std::invalid_argument("exact_single_report_prob: bad arguments");
    // P(K_n = 1) = sum_m lam c_m E[q e^{-lam c_m q}] prod_{j != m} E[e^{-lam c_j q}]
    // with c_m = pi_m b_{n-m} and independent q's.
    std::vector<double> c(e.d + 1);
    for (int j = 0; j <= e.d; ++j) c[j] = e.pi[j] * weight_at(e, n - (j - e.d));
    std::vector<double> lap(e.d + 1);
    for (int j = 0; j <= e.d; ++j) lap[j] = laplace(e.dist_q, lambda * c[j]);
    double total = 0.0;
    for (int m = 0; m <= e.d; ++m) {
        double prod = lambda * c[m] * laplace_xweighted(e.dist_q, lambda * c[m]);
        for (int j = 0; j <= e.d; ++j)
            if (j != m) prod *= lap[j];
        total += prod;
    }
    return total;
}

} // namespace ruin
