#pragma once

#include <cstdint>

namespace grr {

// Counter-seeded xoshiro256++ with Box-Muller normals.  Streams are keyed by
// (seed, replicate) so replicate r of a run is the same bit pattern no matter
// how many replicates ran before it or on which thread it was drawn.

std::uint64_t mix64(std::uint64_t x);

class Xoshiro256pp {
public:
    Xoshiro256pp() : Xoshiro256pp(0, 0) {}
    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();

    // uniform on [0,1) with 53-bit resolution
    double uniform01();

    // uniform on (0,1]: never returns 0, safe under log()
    double uniform_open01();

private:
    std::uint64_t s_[4];
};

class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : gen_(seed, stream) {}

    double next();

    Xoshiro256pp& raw() { return gen_; }

private:
    Xoshiro256pp gen_;
    double spare_ = 0;
    bool have_spare_ = false;
};

} // namespace grr
