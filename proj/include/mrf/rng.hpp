#ifndef MRF_RNG_HPP
#define MRF_RNG_HPP

#include <cstdint>
#include <cstring>

namespace mrf {

// SplitMix64. Used instead of std:: distributions so that sampled values are
// identical across standard library implementations; every consumer derives
// its own stream, which keeps runs bitwise reproducible under any worker
// partitioning.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // stream derivation: mixes a purpose tag and an index into the seed
    static std::uint64_t derive(std::uint64_t seed, const char* tag, std::uint64_t index) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const char* p = tag; *p; ++p) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
            h *= 0x100000001b3ULL;
        }
        Rng mix(seed ^ h ^ (index * 0x9e3779b97f4a7c15ULL));
        return mix.next_u64();
    }

  private:
    std::uint64_t state_;
};

// Halton low-discrepancy sequence, used for quasi-random verification grids.
inline double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    for (std::uint64_t i = index + 1; i > 0; i /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
    }
    return r;
}

}  // namespace mrf

#endif
