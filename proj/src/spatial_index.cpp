#include "geomld/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geomld {

SpatialIndex::SpatialIndex(const PointSet& ps, double cell_side)
    : ps_(&ps), dim_(ps.dim) {
    const std::size_t n = ps.size();
    if (cell_side <= 0.0) {
        cells_ = std::max<int>(1, static_cast<int>(std::ceil(
                                      std::pow(static_cast<double>(std::max<std::size_t>(n, 1)),
                                               1.0 / dim_))));
    } else {
        cells_ = std::max<int>(1, static_cast<int>(std::floor(1.0 / cell_side)));
    }
    // cap the bucket table size; correctness does not depend on the cell side
    const int cap = std::max<int>(1, static_cast<int>(std::floor(
                                         std::pow(4.0e6, 1.0 / dim_))));
    cells_ = std::min(cells_, cap);

    std::size_t total = 1;
    for (int a = 0; a < dim_; ++a) total *= cells_;

    std::vector<std::uint32_t> counts(total + 1, 0);
    std::vector<int> cell(dim_);
    std::vector<std::size_t> flat(n);
    for (std::size_t i = 0; i < n; ++i) {
        cell_of(ps.point(i), cell);
        flat[i] = flatten(cell);
        counts[flat[i] + 1]++;
    }
    for (std::size_t c = 1; c <= total; ++c) counts[c] += counts[c - 1];
    bucket_start_ = counts;
    bucket_items_.resize(n);
    std::vector<std::uint32_t> cursor(bucket_start_.begin(), bucket_start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
        bucket_items_[cursor[flat[i]]++] = static_cast<std::uint32_t>(i);
}

void SpatialIndex::cell_of(std::span<const double> x, std::vector<int>& out) const {
    out.resize(dim_);
    for (int a = 0; a < dim_; ++a) {
        int c = static_cast<int>(std::floor(wrap01(x[a]) * cells_));
        if (c >= cells_) c = cells_ - 1;
        out[a] = c;
    }
}

std::size_t SpatialIndex::flatten(const std::vector<int>& cell) const {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) f = f * cells_ + cell[a];
    return f;
}

template <typename Fn>
void SpatialIndex::for_points_near(std::span<const double> center, double r,
                                   Fn&& fn) const {
    // Offsets wide enough to cover radius r per axis, deduplicated modulo the
    // grid so wrapped cells are visited once.
    const int reach = static_cast<int>(std::ceil(r * cells_)) + 1;
    std::vector<int> base(dim_);
    cell_of(center, base);

    std::vector<std::vector<int>> axis_cells(dim_);
    for (int a = 0; a < dim_; ++a) {
        if (2 * reach + 1 >= cells_) {
            axis_cells[a].resize(cells_);
            for (int c = 0; c < cells_; ++c) axis_cells[a][c] = c;
        } else {
            for (int off = -reach; off <= reach; ++off) {
                int c = (base[a] + off) % cells_;
                if (c < 0) c += cells_;
                axis_cells[a].push_back(c);
            }
        }
    }

    std::vector<std::size_t> pos(dim_, 0);
    std::vector<int> cell(dim_);
    for (;;) {
        for (int a = 0; a < dim_; ++a) cell[a] = axis_cells[a][pos[a]];
        const std::size_t f = flatten(cell);
        for (std::uint32_t t = bucket_start_[f]; t < bucket_start_[f + 1]; ++t)
            fn(bucket_items_[t]);
        int a = dim_ - 1;
        while (a >= 0) {
            if (++pos[a] < axis_cells[a].size()) break;
            pos[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
}

std::vector<std::uint32_t> SpatialIndex::points_in_ball(
    std::span<const double> center, double r) const {
    std::vector<std::uint32_t> out;
    if (r < 0.0) throw std::invalid_argument("points_in_ball: r must be >= 0");
    for_points_near(center, r, [&](std::uint32_t i) {
        if (torus_distance(center, ps_->point(i)) <= r) out.push_back(i);
    });
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t SpatialIndex::count_in_ball(std::span<const double> center, double r,
                                        std::int64_t exclude) const {
    std::size_t cnt = 0;
    for_points_near(center, r, [&](std::uint32_t i) {
        if (static_cast<std::int64_t>(i) == exclude) return;
        if (torus_distance(center, ps_->point(i)) <= r) ++cnt;
    });
    return cnt;
}

bool SpatialIndex::has_k_within(std::span<const double> center, double r, int k,
                                std::int64_t exclude) const {
    if (k <= 0) return true;
    int found = 0;
    bool done = false;
    for_points_near(center, r, [&](std::uint32_t i) {
        if (done || static_cast<std::int64_t>(i) == exclude) return;
        if (torus_distance(center, ps_->point(i)) <= r) {
            if (++found >= k) done = true;
        }
    });
    return done;
}

double SpatialIndex::knn_radius(std::span<const double> center, int k,
                                std::int64_t exclude) const {
    if (k < 1) throw std::invalid_argument("knn_radius: k must be >= 1");
    const std::size_t n = ps_->size();
    const std::size_t avail = n - (exclude >= 0 && static_cast<std::size_t>(exclude) < n ? 1 : 0);
    if (avail < static_cast<std::size_t>(k)) return kInf;

    // Expanding-radius search: once the k-th smallest distance found so far
    // is within the scanned radius, no farther point can improve it.
    double r = 1.0 / cells_;
    const double rmax = 0.5 * std::sqrt(static_cast<double>(dim_)) + 1e-12;
    std::vector<double> dists;
    for (;;) {
        dists.clear();
        for_points_near(center, r, [&](std::uint32_t i) {
            if (static_cast<std::int64_t>(i) == exclude) return;
            const double d = torus_distance(center, ps_->point(i));
            if (d <= r) dists.push_back(d);
        });
        if (dists.size() >= static_cast<std::size_t>(k)) {
            std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
            const double kth = dists[k - 1];
            if (kth <= r || r >= rmax) return kth;
        } else if (r >= rmax) {
            return kInf;  // whole torus scanned, fewer than k candidates
        }
        r = std::min(rmax, 2.0 * r);
    }
}

double SpatialIndex::contact_distance(std::span<const double> center) const {
    if (ps_->empty()) return kInf;
    return knn_radius(center, 1, -1);
}

double knn_radius(std::span<const double> x, const PointSet& phi, int k) {
    if (k < 1) throw std::invalid_argument("knn_radius: k must be >= 1");
    std::int64_t exclude = -1;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        auto p = phi.point(i);
        bool same = true;
        for (int a = 0; a < phi.dim; ++a)
            if (p[a] != wrap01(x[a])) { same = false; break; }
        if (same) { exclude = static_cast<std::int64_t>(i); break; }
    }
    SpatialIndex idx(phi);
    return idx.knn_radius(x, k, exclude);
}

double contact_distance(std::span<const double> x, const PointSet& phi) {
    if (phi.empty()) return kInf;
    SpatialIndex idx(phi);
    return idx.contact_distance(x);
}

}  // namespace geomld
