#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geomld/rng.hpp"
#include "geomld/torus.hpp"

namespace geomld {

// Finite configuration in R^d (not canonicalized to the torus). When a
// distance matrix is attached it overrides the Euclidean metric of the
// coordinates; the sparse evaluators use that to feed scores exact rescaled
// torus distances while keeping chart coordinates available.
struct Cloud {
    int dim = 1;
    std::vector<double> coords;
    std::optional<std::vector<double>> dist_matrix;  // row-major, size m*m

    std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
    double dist(std::size_t i, std::size_t j) const;
    double diam() const;
    Cloud shifted(std::span<const double> y) const;
};

// Sparse-regime score: nonnegative, translation invariant, zero on spread-out
// configurations of the minimal size k0, bounded on bounded cardinalities.
struct ScoreSpec {
    int k0 = 1;
    std::string name;
    std::function<double(const Cloud&)> evaluate;
    std::function<double(std::size_t)> bound;  // b(m) of the cardinality bound
};

// Counts k0-cliques of the unit-radius geometric graph.
ScoreSpec clique_count_score(int d, int k0);
// Sum of edge lengths capped at connectivity radius 1 (k0 = 2).
ScoreSpec edge_length_score(int d);

struct ScoreValidationReport {
    bool inv_pass = false;
    bool loc_pass = false;
    bool bnd_pass = false;
    double pos_estimate = 0.0;  // Monte Carlo estimate of the POS integral
    double pos_se = 0.0;
    bool pos_positive = false;  // estimate > 3 SE above zero
    std::string detail;
};

// Randomized evidence for the four score conditions. INV/LOC/BND are checked
// on `trials` random configurations; POS is a Monte Carlo integral with
// standard error, evidence rather than proof.
ScoreValidationReport validate_score(const ScoreSpec& score, int d, int trials,
                                     const StreamKey& key);

}  // namespace geomld
