// Counter-based random streams (Philox 4x64, 10 rounds). A stream is keyed by
// (seed, stream_id); outputs depend only on the key and a block counter, so
// replication j can always be given stream_id j and its draws are identical
// no matter which worker thread runs it or in which order.
#pragma once

#include <cstdint>

namespace ruin {

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    double uniform01();                    // open interval (0,1), 53-bit
    double normal();                       // N(0,1)
    double exponential(double mean);       // mean > 0
    double gamma(double shape, double rate);
    // Exact Poisson for any intensity >= 0 (chained inversion; recursive
    // halving keeps the inversion start representable for huge intensities).
    std::uint64_t poisson(double intensity);
    // Poisson conditioned on being >= 1 (used where a year is already known
    // to contain at least one reported claim).
    std::uint64_t poisson_positive(double intensity);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_[4];
    std::uint64_t buf_[4];
    int pos_;
};

} // namespace ruin
