#pragma once
// Shared primitives: error taxonomy, sigmoid numerics, seed derivation.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

namespace kgval {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 2, DataError -> 3,
// NumericError -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Rejection sampling exhausted its retry budget (pathologically dense graphs).
struct SamplingError : DataError {
    using DataError::DataError;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

// Scores are clamped to +/-30 before the sigmoid so probabilities stay
// strictly inside (0,1) and the log terms stay finite.
inline constexpr double kScoreClamp = 30.0;

inline double clamp_score(double x) {
    if (x > kScoreClamp) return kScoreClamp;
    if (x < -kScoreClamp) return -kScoreClamp;
    return x;  // NaN falls through and is caught by the trainer's finiteness check
}

inline double sigmoid(double x) {
    x = clamp_score(x);
    return 1.0 / (1.0 + std::exp(-x));
}

// log(sigmoid(x)), stable for any finite x (both exp arguments are <= 0), so
// no clamp: losses keep a true gradient even where the probability saturates.
inline double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic stream split: one base seed, independent streams per purpose.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(seed);
    for (char c : tag) h = splitmix64(h ^ static_cast<unsigned char>(c));
    return splitmix64(h ^ index);
}

inline std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return s.substr(b, e - b);
}

// Chunked parallel map over [0, n). fn(i) must write only to slot i, so the
// result is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2048) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace kgval
