#pragma once

#include <cstdint>
#include <string_view>

namespace relay {

// SplitMix64 finaliser (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stream key for (master seed, realization, purpose tag, sub-index).
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t realization, std::string_view tag,
                                          std::uint64_t sub = 0) {
    std::uint64_t k = splitmix64_mix(seed + kGolden);
    k = splitmix64_mix(k ^ fnv1a64(tag));
    k = splitmix64_mix(k + realization * kGolden);
    return splitmix64_mix(k + (sub + 1) * kGolden);
}

// Counter-based SplitMix64: draw i is mix(key + (i + 1) * golden). Equal to the
// sequential SplitMix64 generator seeded with `key`.
class Rng {
public:
    using result_type = std::uint64_t;
    explicit Rng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        ++counter_;
        return splitmix64_mix(key_ + counter_ * kGolden);
    }
    std::uint64_t counter() const { return counter_; }

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // [0, n) by multiply-high.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace relay
