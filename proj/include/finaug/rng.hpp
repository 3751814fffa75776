#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

// Deterministic random numbers with keyed substreams.
//
// All stochastic code in the library draws from a substream derived from a
// root seed plus one or more keys (a name, a trajectory index, a training
// step).  Two consequences the rest of the library relies on:
//
//   * reproducibility — the same seed and keys yield the same draws on every
//     platform, independent of how many other streams were consumed;
//   * order independence — Monte Carlo trajectories can be generated in any
//     order (or in parallel) without changing any individual trajectory,
//     because each owns its own stream.
//
// The generator is xoshiro256++ seeded through splitmix64.  Normal deviates
// use the Box-Muller transform without caching the second value, so every
// normal draw consumes exactly two raw 64-bit words; consumption stays easy
// to reason about when two processes must stay in lockstep (e.g. the
// stochastic-volatility generator degenerating to the constant-volatility
// one must read the same words for the same shocks).

namespace finaug {

// Innovation distribution for generated noise.  All three are standardized
// to mean zero, variance one; only `normal` has unbounded support.
enum class noise_dist {
    normal,      // standard Gaussian
    uniform,     // uniform on [-sqrt(3), sqrt(3)]
    rademacher,  // +1 or -1 with equal probability
};

// One independent stream of draws.  Cheap to copy; copying forks the state.
class substream {
  public:
    substream(const std::array<std::uint64_t, 4>& state, noise_dist dist);

    // Raw 64-bit word.
    std::uint64_t next_u64();

    // Uniform on (0, 1] (never zero, safe under log).
    double next_unit();

    // Standard normal regardless of the configured distribution.
    double next_standard_normal();

    // One standardized draw from the configured distribution.
    double next();

    void fill(double* out, std::size_t n);
    std::vector<double> draw(std::size_t n);

    noise_dist dist() const { return dist_; }

  private:
    std::array<std::uint64_t, 4> state_;
    noise_dist dist_;
};

// Root randomness: a seed plus a distribution choice.  Streams are derived
// by mixing the seed with the caller's keys; distinct keys give streams that
// behave independently.
class noise_source {
  public:
    explicit noise_source(std::uint64_t seed,
                          noise_dist dist = noise_dist::normal);

    // Stream keyed by up to three integers (e.g. trajectory index, step).
    substream stream(std::uint64_t k0, std::uint64_t k1 = 0,
                     std::uint64_t k2 = 0) const;

    // Stream keyed by a purpose name plus an index; the name is hashed.
    substream stream(std::string_view name, std::uint64_t index = 0) const;

    std::uint64_t seed() const { return seed_; }
    noise_dist dist() const { return dist_; }

  private:
    std::uint64_t seed_;
    noise_dist dist_;
};

}  // namespace finaug
