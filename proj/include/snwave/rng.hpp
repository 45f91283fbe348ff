#pragma once

#include <cstdint>

namespace snwave {

/// SplitMix64-based generator.  Self-contained so that identical seeds give
/// identical streams on every platform and standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ull) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [-1, 1).
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  private:
    std::uint64_t state_;
};

}  // namespace snwave
