#include "geomld/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geomld {

PointSet sample_poisson(double n, int d, const StreamKey& key) {
    if (n < 0.0) throw std::invalid_argument("sample_poisson: n must be >= 0");
    if (d < 1) throw std::invalid_argument("sample_poisson: d must be >= 1");
    CounterRng rng(key);
    const long count = poisson_count(rng, n);
    PointSet ps(d);
    ps.coords.reserve(static_cast<std::size_t>(count) * d);
    for (long i = 0; i < count; ++i)
        for (int a = 0; a < d; ++a) ps.coords.push_back(rng.next_unit());
    return ps;
}

PointSet thin(const PointSet& phi, double survival_p, const StreamKey& key) {
    if (survival_p < 0.0 || survival_p > 1.0)
        throw std::invalid_argument("thin: survival_p must be in [0,1]");
    CounterRng rng(key);
    PointSet out(phi.dim);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const bool keep = rng.next_unit() < survival_p;
        if (keep) out.append_raw(phi.point(i));
    }
    return out;
}

CriticalCoupling sample_critical_coupling(double n, int d, double M,
                                          const StreamKey& key) {
    if (M <= 1.0)
        throw std::invalid_argument("sample_critical_coupling: M must be > 1");
    CriticalCoupling c;
    c.base = sample_poisson(n, d, key.with_lane("base"));
    c.thinned = thin(c.base, 1.0 - 1.0 / M, key.with_lane("thin"));
    c.sprinkle = sample_poisson(n / M, d, key.with_lane("sprinkle"));
    c.unioned = PointSet(d);
    c.unioned.coords = c.thinned.coords;
    c.unioned.coords.insert(c.unioned.coords.end(), c.sprinkle.coords.begin(),
                            c.sprinkle.coords.end());
    return c;
}

long GridSpec::box_of(std::span<const double> x) const {
    long f = 0;
    for (int a = 0; a < dim; ++a) {
        int c = static_cast<int>(std::floor(wrap01(x[a]) * per_axis));
        if (c >= per_axis) c = per_axis - 1;
        f = f * per_axis + c;
    }
    return f;
}

void GridSpec::box_bounds(long box, std::span<double> lo, std::span<double> hi) const {
    for (int a = dim - 1; a >= 0; --a) {
        const long c = box % per_axis;
        box /= per_axis;
        lo[a] = static_cast<double>(c) * side();
        hi[a] = static_cast<double>(c + 1) * side();
    }
}

double GridSpec::distance_to_box_boundary(std::span<const double> x) const {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a) {
        const double xa = wrap01(x[a]);
        int c = static_cast<int>(std::floor(xa * per_axis));
        if (c >= per_axis) c = per_axis - 1;
        const double lo = static_cast<double>(c) * side();
        best = std::min(best, std::min(xa - lo, lo + side() - xa));
    }
    return best;
}

std::vector<long> GridSpec::neighborhood(long box) const {
    std::vector<int> cell(dim);
    long b = box;
    for (int a = dim - 1; a >= 0; --a) {
        cell[a] = static_cast<int>(b % per_axis);
        b /= per_axis;
    }
    std::vector<long> out;
    std::vector<int> off(dim, -1);
    for (;;) {
        long f = 0;
        for (int a = 0; a < dim; ++a) {
            int c = (cell[a] + off[a]) % per_axis;
            if (c < 0) c += per_axis;
            f = f * per_axis + c;
        }
        out.push_back(f);
        int a = dim - 1;
        while (a >= 0) {
            if (++off[a] <= 1) break;
            off[a] = -1;
            --a;
        }
        if (a < 0) break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GridSpec make_grid(int dim, double boxes_per_axis_target) {
    GridSpec g;
    g.dim = dim;
    g.per_axis = std::max(2, static_cast<int>(std::llround(boxes_per_axis_target)));
    return g;
}

std::vector<std::vector<std::uint32_t>> points_by_box(const PointSet& ps,
                                                      const GridSpec& grid) {
    std::vector<std::vector<std::uint32_t>> boxes(grid.box_count());
    for (std::size_t i = 0; i < ps.size(); ++i)
        boxes[grid.box_of(ps.point(i))].push_back(static_cast<std::uint32_t>(i));
    return boxes;
}

PointSet resample_boxes(const PointSet& P, const PointSet& P_prime,
                        const std::vector<bool>& replace_box,
                        const GridSpec& grid) {
    if (P.dim != P_prime.dim)
        throw std::invalid_argument("resample_boxes: dimension mismatch");
    if (static_cast<long>(replace_box.size()) != grid.box_count())
        throw std::invalid_argument("resample_boxes: flag count != box count");
    const auto in_P = points_by_box(P, grid);
    const auto in_Pp = points_by_box(P_prime, grid);
    PointSet out(P.dim);
    for (long b = 0; b < grid.box_count(); ++b) {
        const PointSet& src = replace_box[b] ? P_prime : P;
        const auto& members = replace_box[b] ? in_Pp[b] : in_P[b];
        for (std::uint32_t i : members) out.append_raw(src.point(i));
    }
    return out;
}

}  // namespace geomld
