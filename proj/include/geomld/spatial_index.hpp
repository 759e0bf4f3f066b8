#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "geomld/torus.hpp"

namespace geomld {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform grid over the torus backing ball and k-nearest-neighbor queries.
// Immutable after construction; queries are const and thread-safe. Results
// always equal the brute-force scan; the cell side only affects speed.
class SpatialIndex {
  public:
    // cell_side <= 0 picks the default 1/ceil(N^(1/d)).
    explicit SpatialIndex(const PointSet& ps, double cell_side = 0.0);

    const PointSet& points() const { return *ps_; }

    // indices of points at torus distance <= r from center (closed ball),
    // ascending
    std::vector<std::uint32_t> points_in_ball(std::span<const double> center,
                                              double r) const;

    // count of points with distance <= r, optionally skipping one index
    std::size_t count_in_ball(std::span<const double> center, double r,
                              std::int64_t exclude = -1) const;

    // true once k points lie within distance r (early exit)
    bool has_k_within(std::span<const double> center, double r, int k,
                      std::int64_t exclude = -1) const;

    // k-th smallest distance from center to the points, excluding the point
    // with index `exclude` when >= 0; +inf when fewer than k candidates
    double knn_radius(std::span<const double> center, int k,
                      std::int64_t exclude = -1) const;

    // min distance to the configuration; +inf when empty
    double contact_distance(std::span<const double> center) const;

    int cells_per_axis() const { return cells_; }

  private:
    std::vector<std::uint32_t> cell_points(const std::vector<int>& cell) const;
    void cell_of(std::span<const double> x, std::vector<int>& out) const;
    std::size_t flatten(const std::vector<int>& cell) const;

    template <typename Fn>
    void for_points_near(std::span<const double> center, double r, Fn&& fn) const;

    const PointSet* ps_;
    int dim_;
    int cells_;
    std::vector<std::uint32_t> bucket_start_;
    std::vector<std::uint32_t> bucket_items_;
};

// Free-standing operation forms used by the functional evaluators.

// k-th smallest torus distance from x to phi minus x. If x matches a point of
// phi bit-exactly, that single point is excluded (the set difference); +inf
// when fewer than k remain.
double knn_radius(std::span<const double> x, const PointSet& phi, int k);

double contact_distance(std::span<const double> x, const PointSet& phi);

}  // namespace geomld
