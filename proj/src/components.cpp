#include "geomld/components.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "geomld/spatial_index.hpp"

namespace geomld {

UnionFind::UnionFind(std::size_t n)
    : parent_(n), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
}

std::uint32_t UnionFind::find(std::uint32_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];  // path halving
        x = parent_[x];
    }
    return x;
}

void UnionFind::unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
}

std::vector<std::vector<std::uint32_t>> connected_components(const PointSet& ps,
                                                             double r) {
    if (r < 0.0) throw std::invalid_argument("connected_components: r must be >= 0");
    const std::size_t n = ps.size();
    UnionFind uf(n);
    if (n > 1) {
        SpatialIndex idx(ps, r > 0.0 ? r : 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::uint32_t j : idx.points_in_ball(ps.point(i), r))
                if (j > i) uf.unite(static_cast<std::uint32_t>(i), j);
        }
    }
    std::vector<std::vector<std::uint32_t>> groups;
    std::vector<std::int64_t> slot(n, -1);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t root = uf.find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::int64_t>(groups.size());
            groups.emplace_back();
        }
        groups[slot[root]].push_back(i);
    }
    return groups;
}

}  // namespace geomld
