#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace retsyn {

// splitmix64: tiny, portable, and fully specified, so artifacts hashed from
// seeded draws are identical across platforms (std distributions are not).
class SplitMix {
  public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Bounded draw by modulo; bias is irrelevant for sampling fixtures.
    std::uint64_t bounded(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

// FNV-1a, 64-bit.
inline std::uint64_t hash64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    SplitMix m(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
    return m.next();
}

// Deterministic Fisher-Yates sample of k indices out of n, without replacement.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SplitMix& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SplitMix&& rng) {
    return sample_indices(n, k, rng);
}

}  // namespace retsyn
