#include "finaug/rng.hpp"

#include <cmath>
#include <numbers>

#include "finaug/hash.hpp"

namespace finaug {
namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// splitmix64 step: advances the state and returns one well-mixed word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Absorb one key into the running seed state.
inline std::uint64_t absorb(std::uint64_t h, std::uint64_t key) {
    std::uint64_t s = h ^ (key + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    return splitmix64(s);
}

}  // namespace

substream::substream(const std::array<std::uint64_t, 4>& state, noise_dist dist)
    : state_(state), dist_(dist) {
    // xoshiro256++ must not start from the all-zero state.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t substream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double substream::next_unit() {
    // 53 random bits, shifted into (0, 1]: +1 keeps log() finite.
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double substream::next_standard_normal() {
    // Box-Muller without caching: exactly two words per deviate.
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

double substream::next() {
    switch (dist_) {
        case noise_dist::normal:
            return next_standard_normal();
        case noise_dist::uniform:
            // Span [-sqrt(3), sqrt(3)] for unit variance.
            return (2.0 * next_unit() - 1.0) * std::numbers::sqrt3;
        case noise_dist::rademacher:
            return (next_u64() >> 63) ? 1.0 : -1.0;
    }
    return 0.0;  // unreachable
}

void substream::fill(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = next();
}

std::vector<double> substream::draw(std::size_t n) {
    std::vector<double> v(n);
    fill(v.data(), n);
    return v;
}

noise_source::noise_source(std::uint64_t seed, noise_dist dist)
    : seed_(seed), dist_(dist) {}

substream noise_source::stream(std::uint64_t k0, std::uint64_t k1,
                               std::uint64_t k2) const {
    std::uint64_t h = seed_;
    h = absorb(h, k0);
    h = absorb(h, k1);
    h = absorb(h, k2);
    std::array<std::uint64_t, 4> state;
    for (auto& word : state) word = splitmix64(h);
    return substream(state, dist_);
}

substream noise_source::stream(std::string_view name,
                               std::uint64_t index) const {
    return stream(fnv1a64(name), index, 0x5eedf00dULL);
}

}  // namespace finaug
