#pragma once

#include <cstdint>
#include <random>

namespace relsim {

// Source of i.i.d. uniforms on the open interval (0,1). Every stochastic
// routine in the library draws through this interface, so tests can feed
// fixed or recorded sequences.
class UniformStream {
public:
    virtual ~UniformStream() = default;
    virtual double next() = 0;
};

// mt19937_64-backed stream. The engine sequence is pinned by the standard,
// so identical seeds reproduce identical runs across builds.
class RandomStream final : public UniformStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    double next() override {
        // top 53 bits, offset by half an ulp: strictly inside (0,1)
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Deterministic substream derivation (splitmix64 mixing). Drivers hand every
// independent consumer (subset, chain, DoE, pool) its own derived stream so
// interleaving never perturbs the draws.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

} // namespace relsim
