#pragma once

// Fixed xorshift64* generator. The split shuffle must reproduce bit-exactly
// across toolchains and releases, so the algorithm is pinned here instead of
// going through <random> (whose distributions are implementation-defined).

#include <cstdint>
#include <vector>

namespace testgen {

class Xorshift64Star {
public:
    // A zero seed would lock xorshift at zero; remap it to a fixed odd constant.
    explicit Xorshift64Star(std::uint64_t seed)
        : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 2685821657736338717ull;
    }

    // next() % n; the modulo bias is negligible for the list sizes involved
    // and keeps the sequence trivially reproducible.
    std::uint64_t bounded(std::uint64_t n) { return n ? next() % n : 0; }

    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

private:
    std::uint64_t state_;
};

// Fisher-Yates, descending index, j = bounded(i + 1).
template <typename T>
void shuffle(std::vector<T>& items, Xorshift64Star& rng) {
    for (size_t i = items.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.bounded(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace testgen
