#include "grr/rng.hpp"

#include <cmath>
#include <numbers>

namespace grr {

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
} // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 expansion of the mixed key; the all-zero state cannot occur
    // because splitmix64 is a bijection iterated from distinct increments.
    std::uint64_t key = mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1);
    for (auto& s : s_) {
        key += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = key;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        s = z ^ (z >> 31);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Xoshiro256pp::next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256pp::uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256pp::uniform_open01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; consumes exactly two uniforms per pair regardless of values
    double u1 = gen_.uniform_open01();
    double u2 = gen_.uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

} // namespace grr
