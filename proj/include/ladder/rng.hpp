#ifndef LADDER_RNG_HPP
#define LADDER_RNG_HPP

#include <cstdint>
#include <random>
#include <stdexcept>

namespace ladder {

// SplitMix64 step; used for seed derivation and hashing, never as the
// main generator.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// A seed plan pins every random decision of an experiment: stream s always
// produces the same variates no matter how streams are scheduled onto
// threads. Trials are split into contiguous per-stream blocks.
struct SeedPlan {
    uint64_t base_seed = 0;
    uint32_t streams = 1;

    uint64_t stream_seed(uint32_t stream) const {
        return splitmix64(base_seed ^ splitmix64(0x5bf03635ULL + stream));
    }

    // [first, last) trial indices handled by `stream` out of `trials` total.
    std::pair<uint64_t, uint64_t> stream_range(uint32_t stream, uint64_t trials) const {
        if (streams == 0) throw std::invalid_argument("seed plan: streams must be >= 1");
        uint64_t q = trials / streams, r = trials % streams;
        uint64_t first = stream * q + std::min<uint64_t>(stream, r);
        uint64_t len = q + (stream < r ? 1 : 0);
        return {first, first + len};
    }

    uint64_t hash(uint64_t trials) const {
        uint64_t h = splitmix64(base_seed);
        h = splitmix64(h ^ streams);
        h = splitmix64(h ^ trials);
        return h;
    }
};

class RngStream {
  public:
    explicit RngStream(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in (0,1); bit-shift construction so the value depends only on
    // the engine output, not on libstdc++'s distribution internals.
    double next_unit() {
        uint64_t x = engine_();
        double u = static_cast<double>(x >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

  private:
    std::mt19937_64 engine_;
};

// FNV-1a over bytes; stable digest for artifacts and config hashing.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace ladder

#endif
