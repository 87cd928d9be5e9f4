#include "ruinsim/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "ruinsim/special.hpp"

namespace ruin {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b,
                             std::uint64_t& hi) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    return static_cast<std::uint64_t>(p);
}

inline void philox_round(std::uint64_t c[4], const std::uint64_t k[2]) {
    std::uint64_t hi0, hi1;
    const std::uint64_t lo0 = mulhilo(kMul0, c[0], hi0);
    const std::uint64_t lo1 = mulhilo(kMul1, c[2], hi1);
    const std::uint64_t n0 = hi1 ^ c[1] ^ k[0];
    const std::uint64_t n1 = lo1;
    const std::uint64_t n2 = hi0 ^ c[3] ^ k[1];
    const std::uint64_t n3 = lo0;
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), counter_{0, 0, 0, 0}, buf_{0, 0, 0, 0},
      pos_(4) {}

void RngStream::refill() {
    // Pre-increment, matching the counter convention of other Philox 4x64
    // implementations so raw blocks can be cross-checked externally.
    if (++counter_[0] == 0)
        if (++counter_[1] == 0)
            if (++counter_[2] == 0) ++counter_[3];
    std::uint64_t c[4] = {counter_[0], counter_[1], counter_[2], counter_[3]};
    std::uint64_t k[2] = {seed_, stream_};
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    buf_[0] = c[0];
    buf_[1] = c[1];
    buf_[2] = c[2];
    buf_[3] = c[3];
    pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
    if (pos_ >= 4) refill();
    return buf_[pos_++];
}

double RngStream::uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_quantile(uniform01()); }

double RngStream::exponential(double mean) {
    if (!(mean > 0.0))
        throw std::invalid_argument("exponential: mean must be positive");
    return -mean * std::log(uniform01());
}

double RngStream::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // Boost to shape+1 and scale back (Marsaglia-Tsang small-shape trick).
        const double u = uniform01();
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v / rate;
    }
}

std::uint64_t RngStream::poisson(double intensity) {
    if (!(intensity >= 0.0))
        throw std::invalid_argument("poisson: intensity must be >= 0");
    if (intensity == 0.0) return 0;
    if (intensity > 500.0) {
        // Exact split by infinite divisibility; keeps exp(-v) representable.
        const double half = 0.5 * intensity;
        return poisson(half) + poisson(intensity - half);
    }
    const double u = uniform01();
    double p = std::exp(-intensity);
    double cum = p;
    std::uint64_t k = 0;
    while (u > cum) {
        ++k;
        p *= intensity / static_cast<double>(k);
        cum += p;
        if (k > 4000) break; // cum ~ 1 long before this; numeric guard only
    }
    return k;
}

std::uint64_t RngStream::poisson_positive(double intensity) {
    if (!(intensity > 0.0))
        throw std::invalid_argument("poisson_positive: intensity must be > 0");
    if (intensity > 500.0) {
        for (;;) {
            const std::uint64_t k = poisson(intensity);
            if (k > 0) return k; // P(0) = exp(-500) ~ 0; loop is formal
        }
    }
    const double p0 = std::exp(-intensity);
    const double u = uniform01() * (1.0 - p0); // target mass above k = 0
    double p = p0 * intensity;                 // P(K = 1)
    double cum = p;
    std::uint64_t k = 1;
    while (u > cum) {
        ++k;
        p *= intensity / static_cast<double>(k);
        cum += p;
        if (k > 4000) break;
    }
    return k;
}

} // namespace ruin
