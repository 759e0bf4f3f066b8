#pragma once

// Brute-force oracles shared by the test suites. These deliberately avoid
// the grid index and the production evaluators: plain O(N^2) scans and
// direct formula transcriptions.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "geomld/components.hpp"
#include "geomld/rng.hpp"
#include "geomld/spatial_index.hpp"
#include "geomld/torus.hpp"

namespace oracle {

using geomld::PointSet;
using geomld::torus_distance;

inline std::vector<std::uint32_t> ball(const PointSet& ps,
                                       std::span<const double> center, double r) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (torus_distance(center, ps.point(i)) <= r)
            out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

inline double knn_radius(const PointSet& ps, std::span<const double> center,
                         int k, std::int64_t exclude) {
    std::vector<double> d;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (static_cast<std::int64_t>(i) == exclude) continue;
        d.push_back(torus_distance(center, ps.point(i)));
    }
    if (d.size() < static_cast<std::size_t>(k)) return geomld::kInf;
    std::sort(d.begin(), d.end());
    return d[k - 1];
}

inline double contact(const PointSet& ps, std::span<const double> center) {
    double best = geomld::kInf;
    for (std::size_t i = 0; i < ps.size(); ++i)
        best = std::min(best, torus_distance(center, ps.point(i)));
    return best;
}

// component labels via all-pairs union-find
inline std::vector<std::uint32_t> component_labels(const PointSet& ps, double r) {
    const std::size_t n = ps.size();
    geomld::UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (torus_distance(ps, i, j) <= r)
                uf.unite(static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(j));
    std::vector<std::uint32_t> lab(n);
    for (std::uint32_t i = 0; i < n; ++i) lab[i] = uf.find(i);
    return lab;
}

inline PointSet random_point_set(geomld::CounterRng& rng, int d, std::size_t n) {
    PointSet ps(d);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) x[a] = rng.next_unit();
        ps.append(x);
    }
    return ps;
}

}  // namespace oracle
