#pragma once

#include <cstdint>
#include <string_view>

#include "ledgerlab/bytes.hpp"

namespace ledgerlab {

// SplitMix64 stream. Used everywhere seeded randomness is needed so that
// fixtures and simulations are byte-identical across platforms (the standard
// library distributions are not portable).
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) via rejection sampling.
    uint64_t below(uint64_t bound) {
        uint64_t threshold = -bound % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    Bytes bytes(size_t n) {
        Bytes out(n);
        for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint8_t>(next() & 0xff);
        return out;
    }

    // Derive an independent stream, e.g. one per node.
    Rng fork(std::string_view label) const {
        Digest d = sha256(std::string(label) + "#" + std::to_string(state_));
        uint64_t s = 0;
        for (int i = 0; i < 8; ++i) s = (s << 8) | d[i];
        return Rng(s);
    }

  private:
    uint64_t state_;
};

}  // namespace ledgerlab
