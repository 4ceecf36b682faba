#pragma once

#include <cstdint>
#include <initializer_list>

namespace fpp::rng {

/// SplitMix64 finalizer. Full-avalanche 64-bit mixer, applied per folded word
/// so that a key behaves like a hash of its parts.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic key builder: fold words one by one through the mixer.
/// The result depends only on the sequence of folded values, never on
/// evaluation order elsewhere, which is what makes field queries
/// reproducible across query order and thread count.
class KeyChain {
public:
    explicit constexpr KeyChain(std::uint64_t seed) noexcept
        : h_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    constexpr KeyChain& fold(std::uint64_t w) noexcept {
        h_ = mix(h_ ^ w);
        return *this;
    }

    constexpr KeyChain& fold_signed(std::int64_t w) noexcept {
        return fold(static_cast<std::uint64_t>(w));
    }

    [[nodiscard]] constexpr std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_;
};

constexpr std::uint64_t key(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) noexcept {
    KeyChain k(seed);
    for (auto p : parts) k.fold(p);
    return k.value();
}

/// Map a 64-bit word to a double in [0, 1) using the top 53 bits.
constexpr double to_unit(std::uint64_t w) noexcept {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

constexpr double unit_from(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) noexcept {
    return to_unit(key(seed, parts));
}

} // namespace fpp::rng
