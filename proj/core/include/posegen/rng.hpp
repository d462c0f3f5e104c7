#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace posegen {

/// Counter-based deterministic generator built on the SplitMix64 finalizer.
///
/// The i-th output is a pure function of (seed, i): out(i) = mix64(seed +
/// (i+1) * 0x9E3779B97F4A7C15). Streams can therefore be split, replayed and
/// serialized by storing just the seed and the counter, which is what keeps
/// training checkpoints resumable and dataset generation byte-stable across
/// platforms.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    /// SplitMix64 finalizer.
    static std::uint64_t mix64(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return x;
    }

    /// FNV-1a over a string tag, used to label derived streams.
    static std::uint64_t hash_tag(std::string_view tag) {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (unsigned char c : tag) {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        return h;
    }

    /// Independent stream keyed by (seed, index).
    static CounterRng derive(std::uint64_t seed, std::uint64_t stream_index) {
        return CounterRng(mix64(seed ^ mix64(stream_index + 0x632BE59BD9B4E019ull)));
    }

    /// Independent stream keyed by (seed, tag).
    static CounterRng derive(std::uint64_t seed, std::string_view tag) {
        return derive(seed, hash_tag(tag));
    }

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ull);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        // Modulo bias is below 2^-40 for any range this project uses.
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    /// Standard normal draw via Box-Muller. Consumes two counter values per
    /// call and keeps no cached state, so the stream position stays a plain
    /// counter.
    double gaussian() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;       // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }
    void set_counter(std::uint64_t c) { counter_ = c; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace posegen
