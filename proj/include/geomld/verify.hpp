#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geomld/estimation.hpp"

namespace geomld {

struct VerifySummary {
    std::vector<BoundCheck> checks;
    bool hard_failure = false;   // a deterministic claim was violated
    bool stat_failure = false;   // a statistical bound beyond its slack
    std::string csv;             // the full bound-check table
};

// Runs every desk-scale verifier: geometry oracle equivalence, the
// deterministic sprinkling bounds, the ball-count and bad-box inequalities,
// the Lemma-style sprinkling probability bound, the coupling chi-square
// tests, the dense sequential hard invariant and the rate-function
// identities. `replicates` scales the statistical suites. Output bytes
// depend only on (seed, replicates), never on the thread count.
VerifySummary run_verify_suite(std::uint64_t seed, long replicates, int threads);

}  // namespace geomld
