#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace geomld {

// Addressable randomness: every consumer derives its stream from a
// (seed, lane, replicate) triple. Identical triples reproduce the same
// stream bit-for-bit; distinct triples give statistically independent
// streams. No global generator exists anywhere in the library.
struct StreamKey {
    std::uint64_t seed = 0;
    std::string lane;
    std::int64_t replicate = 0;

    StreamKey with_lane(std::string_view suffix) const;
    StreamKey with_replicate(std::int64_t r) const;
};

// Counter-based generator. The state is a single 64-bit base derived by
// chaining a SplitMix64 finalizer over seed, FNV-1a(lane) and replicate;
// output i is mix(base + i * 0x9E3779B97F4A7C15). Skipping ahead is O(1)
// and the sequence for a key does not depend on how other keys are used,
// which is what makes replicate-parallel runs reproducible under any
// scheduling.
class CounterRng {
  public:
    explicit CounterRng(const StreamKey& key);

    std::uint64_t next_u64();
    // uniform in [0,1), 53-bit resolution
    double next_unit();
    double uniform(double lo, double hi);
    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n);

  private:
    std::uint64_t base_ = 0;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Poisson count with the given mean. Inversion by sequential search for
// mean < 30, Hormann's PTRS transformed rejection above. Both consume the
// rng deterministically, so sampled processes are reproducible per key.
long poisson_count(CounterRng& rng, double mean);

}  // namespace geomld
