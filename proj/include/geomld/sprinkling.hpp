#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geomld/functionals.hpp"
#include "geomld/point_process.hpp"
#include "geomld/rng.hpp"

namespace geomld {

// Outcome of one coupling construction. `inserted` is disjoint from the base
// configuration; `max_post_radius` is computed on the union. `excess` is the
// functional increase attributable to the construction (NaN when the needed
// parameters are absent).
struct SprinkleReport {
    long bad_count = 0;            // #J (nodes) or #bad boxes
    PointSet inserted;             // newly placed points
    bool target_event_holds = false;
    double max_post_radius = 0.0;
    double excess = 0.0;
    double adjusted_grid_side = 0.0;  // grid constructions record rounding
    double adjusted_sub_side = 0.0;
};

// ---- k-nearest-neighbor sprinkling (critical regime, representation A) ----

// J_n^M: indices of points whose k-NN radius exceeds M n^{-1/d}.
std::vector<std::uint32_t> find_large_radius_nodes(const PointSet& phi,
                                                   const RegimeParams& p);

// Deterministic upper bound k 2^d n / (kappa_d M^d) for #J_n^M.
double large_radius_count_bound(const RegimeParams& p);

// Keeps X in J that are lexicographically minimal within the n^{-1/d} ball
// around X (minimal-image displacement order). Survivors are pairwise more
// than n^{-1/d} apart.
std::vector<std::uint32_t> distinguished_subset(const std::vector<std::uint32_t>& J,
                                                const PointSet& phi,
                                                const RegimeParams& p);

// Inserts exactly k uniform points into the radius n^{-1/d}/2 ball around
// each distinguished J-node. target_event_holds records whether every J-node
// and inserted point has post-sprinkle k-NN radius <= (k+1) n^{-1/d}.
std::pair<PointSet, SprinkleReport> knn_sprinkle(const PointSet& phi,
                                                 const RegimeParams& p,
                                                 const StreamKey& key);

// ---- contact-distance sprinkling (critical regime, representation B) ----

// Grid of side ~ n^{-1/d} M / log M; empty boxes are bad; one uniform point
// goes into the central radius-n^{-1/d} ball of every subcube (side
// ~ n^{-1/d} log M) of every bad box. target: probe-grid max contact
// distance <= M n^{-1/d}.
std::pair<PointSet, SprinkleReport> contact_sprinkle(const PointSet& phi,
                                                     const RegimeParams& p,
                                                     const StreamKey& key);

// ---- sprinkling probability lower bound ----

// (1-1/M)^N e^{-n/M} ((V/M)^m / m! e^{-V/M})^I, evaluated in log space.
double sprinkle_prob_lower_bound(long N_n, double n, double M, int m, double V,
                                 long I);
double sprinkle_prob_lower_bound_log(long N_n, double n, double M, int m,
                                     double V, long I);

// ---- sparse box resampling ----

// Bad boxes contain a point with at least k0 other points within
// 2^d k0 r_n; their content is replaced by P'. target: in every resampled
// box, max over X in Q of #(P' in the ball intersected with Q) <= k0 - 1,
// the count including X itself.
std::pair<PointSet, SprinkleReport> sparse_resample(const PointSet& P,
                                                    const PointSet& P_prime,
                                                    const RegimeParams& p,
                                                    const StreamKey& key,
                                                    const ScoreSpec* score = nullptr);

GridSpec sparse_grid(const RegimeParams& p);
std::vector<bool> sparse_bad_boxes(const PointSet& P, const RegimeParams& p,
                                   const GridSpec& grid);

// ---- dense sequential resampling ----

GridSpec dense_grid(const RegimeParams& p);

// Radius below which a point's score stays <= M: ((M+a_n+s0)/(n kappa_d))^{1/d}.
double dense_score_radius(const RegimeParams& p, double M);

// Shell width t_n = ((a_n + w_n)/(n kappa_d))^{1/d}.
double dense_shell_width(const RegimeParams& p);

// (eta, M)-boundedness of one box: no point of eta in the box scores above M.
// `restrict_shell` additionally drops the shell of width t_n next to the box
// boundary from the checked region.
bool dense_bounded_check(const PointSet& eta, long box, const GridSpec& grid,
                         const RegimeParams& p, double M,
                         bool restrict_shell = false);

struct BoxState {
    long box_index = 0;
    bool resampled = false;  // source: original (false) / resampled (true)
    bool bounded = false;    // (P'', M)-bounded after the construction
    bool good = false;       // realized content passed the goodness test
    double estimate = 0.0;   // binding goodness estimate (min over neighbors)
    double threshold = 0.0;  // its 1 - b_{i,j} threshold
};

struct GoodnessEstimate {
    double estimate = 0.0;
    double std_err = 0.0;
    double threshold_b = 0.0;  // b_{i,j}^{(M)}
    bool deterministic = false;
};

enum class BoxSource { Original, Resampled };

// Working state of the sequential walk; boxes are ordered row-major, so the
// order index equals the box index.
class DenseSequentialContext {
  public:
    DenseSequentialContext(const PointSet& P, const PointSet& P_prime,
                           const RegimeParams& p);

    const GridSpec& grid() const { return grid_; }

    // a_{i,j}(eta): conditional probability that box i is bounded for the
    // configuration that takes eta in box j, the resolved sources in boxes
    // < j, and fresh Poisson draws in boxes > j. Exact 0/1 when every box of
    // the neighborhood of i is already fixed.
    GoodnessEstimate goodness(long j, long i,
                              const std::vector<BoxSource>& resolved_below_j,
                              BoxSource eta, int samples, const StreamKey& key) const;

    double threshold_b(long j, long i) const;  // e^{-M 2^{-1-#{s in N+(i): s<=j}}}

    bool box_good(long j, const std::vector<BoxSource>& resolved_below_j,
                  BoxSource eta, int samples, const StreamKey& key,
                  double* binding_estimate = nullptr,
                  double* binding_threshold = nullptr) const;

    // E_j^b: (P', M0)-boundedness of box j minus its boundary shell.
    bool shell_interior_bounded(long j) const;

    const PointSet& P() const { return *P_; }
    const PointSet& P_prime() const { return *Pp_; }

  private:
    const PointSet* P_;
    const PointSet* Pp_;
    RegimeParams params_;
    GridSpec grid_;
    std::vector<std::vector<std::uint32_t>> boxes_P_;
    std::vector<std::vector<std::uint32_t>> boxes_Pp_;
};

struct DenseResampleResult {
    PointSet P2;  // the coupled process P''
    std::vector<BoxState> states;
    SprinkleReport report;  // target_event_holds carries the E* indicator
    bool e_star = false;
};

// Walks the boxes in order, resamples the bad ones from P', re-checks
// goodness and the interior boundedness condition on the realized content,
// and finally verifies (P'', M)-boundedness of every box.
DenseResampleResult dense_sequential_resample(const PointSet& P,
                                              const PointSet& P_prime,
                                              const RegimeParams& p, int samples,
                                              const StreamKey& key);

// Error terms of the dense construction: boundary-shell sum with cap M and
// bad-box sum with cap M0, both divided by rho^de.
std::pair<double, double> dense_error_terms(const PointSet& P2,
                                            const std::vector<long>& bad_boxes,
                                            const RegimeParams& p);

// CSV of BoxState rows: box_index, source, bounded, good, estimate, threshold.
std::string box_states_to_csv(const std::vector<BoxState>& states);

}  // namespace geomld
