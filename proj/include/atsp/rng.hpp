#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace atsp {

/// Counter-based generator "ctr-splitmix64/v1".
///
/// Output k of a stream with key K is splitmix64's finalizer applied to
/// K + (k + 1) * golden. The stream is a pure function of (key, counter), so
/// any instance can be regenerated independently of every other one. The
/// output sequence is frozen: changing it changes every generated instance.
class CounterRng {
public:
    static constexpr const char* kName = "ctr-splitmix64/v1";

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Derives a stream key from the components identifying one instance.
    static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t n, double digits,
                                              std::uint64_t index) noexcept {
        std::uint64_t k = mix(seed ^ 0x6a09e667f3bcc909ULL);
        k = mix(k ^ (n + 0xbb67ae8584caa73bULL));
        k = mix(k ^ std::bit_cast<std::uint64_t>(digits));
        k = mix(k ^ (index * 0x3c6ef372fe94f82bULL + 0xa54ff53a5f1d36f1ULL));
        return k;
    }

    constexpr std::uint64_t next() noexcept {
        ++counter_;
        return mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Unbiased uniform draw from [0, range) by rejection.
    constexpr std::uint64_t uniform(std::uint64_t range) {
        if (range == 0) throw std::invalid_argument("uniform range must be positive");
        // Values below `threshold` would make the modulo biased.
        const std::uint64_t threshold = (0 - range) % range;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold) return x % range;
        }
    }

    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace atsp
