#include "geomld/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace geomld {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
    // SplitMix64 finalizer (Steele, Lea, Flood 2014)
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

StreamKey StreamKey::with_lane(std::string_view suffix) const {
    StreamKey k = *this;
    k.lane += '/';
    k.lane += suffix;
    return k;
}

StreamKey StreamKey::with_replicate(std::int64_t r) const {
    StreamKey k = *this;
    k.replicate = r;
    return k;
}

CounterRng::CounterRng(const StreamKey& key) {
    std::uint64_t h = mix64(key.seed);
    h = mix64(h ^ fnv1a64(key.lane));
    h = mix64(h ^ static_cast<std::uint64_t>(key.replicate));
    base_ = h;
}

std::uint64_t CounterRng::next_u64() {
    return mix64(base_ + (counter_++) * kGolden);
}

double CounterRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    // rejection to avoid modulo bias
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

namespace {

long poisson_inversion(CounterRng& rng, double mean) {
    const double u = rng.next_unit();
    double p = std::exp(-mean);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 1000000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

// PTRS: W. Hormann, "The transformed rejection method for generating
// Poisson random variables", Insurance Math. Econom. 12 (1993).
long poisson_ptrs(CounterRng& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.next_unit() - 0.5;
        const double v = rng.next_unit();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * loglam - mean - std::lgamma(k + 1.0)) {
            return static_cast<long>(kf);
        }
    }
}

}  // namespace

long poisson_count(CounterRng& rng, double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("poisson_count: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) return poisson_inversion(rng, mean);
    return poisson_ptrs(rng, mean);
}

}  // namespace geomld
