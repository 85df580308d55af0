#include "relsim/random.hpp"

namespace relsim {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ (a + 0x1000000000000001ULL));
    h = splitmix64(h ^ (b + 0x2000000000000003ULL));
    h = splitmix64(h ^ (c + 0x3000000000000005ULL));
    return h;
}

} // namespace relsim
