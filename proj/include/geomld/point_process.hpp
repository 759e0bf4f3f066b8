#pragma once

#include <vector>

#include "geomld/rng.hpp"
#include "geomld/torus.hpp"

namespace geomld {

// Homogeneous Poisson process of intensity n on the d-torus. Deterministic
// per key: the count is drawn first, then coordinates in point order.
PointSet sample_poisson(double n, int d, const StreamKey& key);

// Independent retention with the given survival probability, one uniform per
// point in index order. Output is a subset of phi in the original order.
PointSet thin(const PointSet& phi, double survival_p, const StreamKey& key);

// Thinning plus independent sprinkling: thinned keeps each point of base
// with probability 1 - 1/M, sprinkle is Poisson with intensity n/M, and
// unioned = thinned + sprinkle has the law of base again.
struct CriticalCoupling {
    PointSet base;
    PointSet thinned;
    PointSet sprinkle;
    PointSet unioned;
};

CriticalCoupling sample_critical_coupling(double n, int d, double M,
                                          const StreamKey& key);

// Regular box grid covering the torus, per_axis boxes per axis.
struct GridSpec {
    int dim = 1;
    int per_axis = 1;

    double side() const { return 1.0 / per_axis; }
    long box_count() const {
        long c = 1;
        for (int a = 0; a < dim; ++a) c *= per_axis;
        return c;
    }
    long box_of(std::span<const double> x) const;
    // half-open box [lo, hi) per axis
    void box_bounds(long box, std::span<double> lo, std::span<double> hi) const;
    // min distance from x to the boundary of its own box
    double distance_to_box_boundary(std::span<const double> x) const;
    // order indices of the 3^d boxes sharing at least a corner with `box`
    // (torus adjacency, includes box itself), ascending and deduplicated
    std::vector<long> neighborhood(long box) const;
};

// Round the real target count to a covering integer grid, at least 2 per
// axis. The adjustment mirrors the negligible side-length change the grid
// constructions assume.
GridSpec make_grid(int dim, double boxes_per_axis_target);

// P'' agreeing with replacement on the flagged boxes and with P elsewhere.
// Points are emitted box by box in box-index order.
PointSet resample_boxes(const PointSet& P, const PointSet& P_prime,
                        const std::vector<bool>& replace_box,
                        const GridSpec& grid);

// Box membership split: indices of points per box.
std::vector<std::vector<std::uint32_t>> points_by_box(const PointSet& ps,
                                                      const GridSpec& grid);

}  // namespace geomld
