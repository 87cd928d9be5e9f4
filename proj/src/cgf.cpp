#include "ruinsim/cgf.hpp"

#include <cmath>

namespace ruin {

namespace {

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

// Domain of alpha for a term whose base domain (in beta = coeff*alpha) is d.
AlphaDomain scale_domain(const AlphaDomain& d, double coeff) {
    if (coeff == 0.0) return AlphaDomain{};
    AlphaDomain out;
    if (coeff > 0.0) {
        out.lo = d.lo / coeff;
        out.hi = d.hi / coeff;
        out.lo_closed = d.lo_closed;
        out.hi_closed = d.hi_closed;
    } else {
        out.lo = d.hi / coeff;
        out.hi = d.lo / coeff;
        out.lo_closed = d.hi_closed;
        out.hi_closed = d.lo_closed;
    }
    return out;
}

} // namespace

CgfExpr& CgfExpr::log_moment_of(DistributionSpec d, double coeff) {
    terms.emplace_back(LogMomentTerm{std::move(d), coeff});
    return *this;
}

CgfExpr& CgfExpr::cgf_of(DistributionSpec d, double coeff) {
    terms.emplace_back(CgfTerm{std::move(d), coeff});
    return *this;
}

CgfExpr& CgfExpr::constant(double v) {
    terms.emplace_back(ConstantTerm{v});
    return *this;
}

double eval(const CgfExpr& e, double alpha) {
    double sum = 0.0;
    for (const auto& t : e.terms) {
        const double v = std::visit(
            overload{
                [&](const LogMomentTerm& lm) {
                    return lm.coeff == 0.0 ? 0.0
                                           : log_moment(lm.dist, lm.coeff * alpha);
                },
                [&](const CgfTerm& c) {
                    return c.coeff == 0.0 ? 0.0 : cgf(c.dist, c.coeff * alpha);
                },
                [&](const ConstantTerm& c) { return c.value; },
            },
            t);
        if (v == kInf) return kInf;
        sum += v;
    }
    return sum;
}

double eval_derivative(const CgfExpr& e, double alpha) {
    double sum = 0.0;
    for (const auto& t : e.terms) {
        sum += std::visit(
            overload{
                [&](const LogMomentTerm& lm) {
                    return lm.coeff == 0.0
                               ? 0.0
                               : lm.coeff * log_moment_derivative(
                                                lm.dist, lm.coeff * alpha);
                },
                [&](const CgfTerm& c) {
                    return c.coeff == 0.0
                               ? 0.0
                               : c.coeff * cgf_derivative(c.dist, c.coeff * alpha);
                },
                [&](const ConstantTerm&) { return 0.0; },
            },
            t);
    }
    return sum;
}

AlphaDomain domain(const CgfExpr& e) {
    AlphaDomain out;
    for (const auto& t : e.terms) {
        AlphaDomain d = std::visit(
            overload{
                [&](const LogMomentTerm& lm) {
                    return scale_domain(log_moment_domain(lm.dist), lm.coeff);
                },
                [&](const CgfTerm& c) {
                    return scale_domain(cgf_domain(c.dist), c.coeff);
                },
                [&](const ConstantTerm&) { return AlphaDomain{}; },
            },
            t);
        if (d.lo > out.lo) {
            out.lo = d.lo;
            out.lo_closed = d.lo_closed;
        } else if (d.lo == out.lo) {
            out.lo_closed = out.lo_closed && d.lo_closed;
        }
        if (d.hi < out.hi) {
            out.hi = d.hi;
            out.hi_closed = d.hi_closed;
        } else if (d.hi == out.hi) {
            out.hi_closed = out.hi_closed && d.hi_closed;
        }
    }
    return out;
}

LundbergSolution solve_rate(const CgfExpr& e, double alpha_max_hint) {
    const double v0 = eval(e, 0.0);
    if (!(v0 <= 1e-12))
        throw std::invalid_argument("solve_rate: eval at 0 must be <= 0");
    const AlphaDomain dom = domain(e);
    LundbergSolution sol;
    sol.domain_bound = dom.hi;
    if (!(dom.hi > 0.0))
        throw NoPositiveRateError("solve_rate: no positive finite domain");

    const double start = std::isfinite(dom.hi) ? std::min(1e-6, 0.5 * dom.hi)
                                               : 1e-6;
    double lo = 0.0, hi = 0.0;
    const double v_start = eval(e, start);
    if (v_start == kInf)
        throw NoPositiveRateError("solve_rate: not finite right of zero");
    if (v_start > 0.0) {
        if (v0 < -1e-14) {
            lo = 0.0;
            hi = start; // root squeezed into (0, start)
        } else {
            // convex, zero at 0, positive immediately to the right
            throw NoPositiveRateError(
                "solve_rate: value turns positive immediately right of zero");
        }
    } else {
        // geometric expansion until sign change / domain edge / hint
        lo = start;
        bool bracketed = false;
        if (std::isfinite(dom.hi)) {
            // approach the boundary geometrically from inside
            double prev = start;
            for (int k = 1; k <= 60 && !bracketed; ++k) {
                const double probe =
                    dom.hi - (dom.hi - start) * std::pow(0.5, k);
                const double v = eval(e, probe);
                if (v == kInf) break; // treat as beyond the usable domain
                if (v > 0.0) {
                    lo = prev;
                    hi = probe;
                    bracketed = true;
                } else {
                    prev = probe;
                }
            }
            if (!bracketed) {
                // value stays <= 0 across the finite domain: the supremum is
                // the boundary itself; theorem hypotheses fail downstream.
                sol.rate = dom.hi;
                sol.boundary = true;
                sol.derivative = std::numeric_limits<double>::quiet_NaN();
                sol.mu = std::numeric_limits<double>::quiet_NaN();
                sol.bracket_lo = prev;
                sol.bracket_hi = dom.hi;
                sol.tolerance = dom.hi - prev;
                return sol;
            }
        } else {
            double prev = start;
            bool hit_hint = false;
            for (double probe = 2.0 * start;; probe *= 2.0) {
                if (probe > alpha_max_hint) {
                    hit_hint = true;
                    break;
                }
                const double v = eval(e, probe);
                if (v > 0.0) {
                    lo = prev;
                    hi = probe;
                    bracketed = true;
                    break;
                }
                prev = probe;
            }
            if (hit_hint && !bracketed)
                throw UnboundedRateError(
                    "solve_rate: value stays <= 0 up to alpha_max_hint");
        }
    }

    // bisection on the sign change, then Newton polish
    double flo = eval(e, lo);
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = eval(e, mid);
        if (v <= 0.0) {
            lo = mid;
            flo = v;
        } else {
            hi = mid;
        }
    }
    (void)flo;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double f = eval(e, x);
        const double df = eval_derivative(e, x);
        if (!(df > 0.0)) break;
        const double nx = x - f / df;
        if (nx <= lo || nx >= hi) break;
        x = nx;
    }
    sol.rate = x;
    sol.derivative = eval_derivative(e, x);
    sol.mu = 1.0 / sol.derivative;
    sol.bracket_lo = lo;
    sol.bracket_hi = hi;
    sol.tolerance = hi - lo;
    return sol;
}

double legendre(const CgfExpr& e, double x) {
    const AlphaDomain dom = domain(e);
    auto gval = [&](double a) { return a * x - eval(e, a); };
    auto slope = [&](double a) { return eval_derivative(e, a); };

    double start = 0.0;
    if (!(dom.lo < 0.0 && dom.hi > 0.0))
        start = std::isfinite(dom.lo) && std::isfinite(dom.hi)
                    ? 0.5 * (dom.lo + dom.hi)
                    : (std::isfinite(dom.lo) ? dom.lo + 1.0 : dom.hi - 1.0);

    double lo = start, hi = start;
    const double d0 = slope(start);
    if (d0 == x) return gval(start);
    if (d0 < x) {
        // walk towards the upper domain edge until the slope exceeds x
        bool found = false;
        if (std::isfinite(dom.hi)) {
            for (int k = 1; k <= 52 && !found; ++k) {
                const double probe = dom.hi - (dom.hi - start) * std::pow(0.5, k);
                if (slope(probe) >= x) {
                    hi = probe;
                    found = true;
                } else {
                    lo = probe;
                }
            }
            if (!found) return gval(lo); // slope capped below x: sup at edge
        } else {
            double step = 1.0;
            for (int k = 0; k <= 70 && !found; ++k) {
                const double probe = start + step;
                if (slope(probe) >= x) {
                    hi = probe;
                    found = true;
                } else {
                    lo = probe;
                    step *= 2.0;
                }
                if (probe > 1e12) break;
            }
            if (!found) {
                // linear-ish growth of the objective: diverges iff the slope
                // gap stays positive
                return (x - slope(lo) > 1e-11) ? kInf : gval(lo);
            }
        }
    } else {
        bool found = false;
        if (std::isfinite(dom.lo)) {
            for (int k = 1; k <= 52 && !found; ++k) {
                const double probe = dom.lo + (start - dom.lo) * std::pow(0.5, k);
                if (slope(probe) <= x) {
                    lo = probe;
                    found = true;
                } else {
                    hi = probe;
                }
            }
            if (!found) return gval(hi);
        } else {
            double step = 1.0;
            for (int k = 0; k <= 70 && !found; ++k) {
                const double probe = start - step;
                if (slope(probe) <= x) {
                    lo = probe;
                    found = true;
                } else {
                    hi = probe;
                    step *= 2.0;
                }
                if (probe < -1e12) break;
            }
            if (!found) return (slope(hi) - x > 1e-11) ? kInf : gval(hi);
        }
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, std::fabs(hi));
         ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return gval(0.5 * (lo + hi));
}

} // namespace ruin
