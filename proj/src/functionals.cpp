#include "geomld/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geomld/components.hpp"
#include "geomld/spatial_index.hpp"

namespace geomld {

double unit_ball_volume(int d) {
    return std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double RegimeParams::sparse_speed() const {
    return std::pow(n, k0) * std::pow(r_n, static_cast<double>(d) * (k0 - 1));
}

double RegimeParams::dense_speed() const {
    return n * std::pow(a_n, k - 1) * std::exp(-a_n);
}

double RegimeParams::effective_w_n() const {
    if (w_n > 0.0) return w_n;
    return a_n / std::log(std::max(a_n, 1.0 + 1e-9));
}

double DiscreteMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& [x, m] : atoms) s += m;
    return s;
}

namespace {

// Component as a Cloud: anchor-relative minimal-image chart coordinates
// rescaled by 1/r_n, plus the exact rescaled torus distance matrix (scores
// read distances from the matrix, so torus wrap never leaks into values).
Cloud rescaled_component(const PointSet& phi, const std::vector<std::uint32_t>& members,
                         double r_n) {
    const int d = phi.dim;
    const std::size_t m = members.size();
    Cloud c;
    c.dim = d;
    c.coords.resize(m * d);
    const auto anchor = phi.point(members[0]);
    std::vector<double> delta(d);
    for (std::size_t i = 0; i < m; ++i) {
        torus_displacement(anchor, phi.point(members[i]), delta);
        for (int a = 0; a < d; ++a) c.coords[i * d + a] = delta[a] / r_n;
    }
    auto& mat = c.dist_matrix.emplace(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double dd = torus_distance(phi, members[i], members[j]) / r_n;
            mat[i * m + j] = dd;
            mat[j * m + i] = dd;
        }
    return c;
}

void require_sparse(const RegimeParams& p, const ScoreSpec& score) {
    if (p.r_n <= 0.0) throw std::invalid_argument("sparse functional: r_n must be > 0");
    if (p.n <= 0.0) throw std::invalid_argument("sparse functional: n must be > 0");
    if (score.k0 != p.k0)
        throw std::invalid_argument("sparse functional: score.k0 != params.k0");
}

}  // namespace

double sparse_H(const PointSet& phi, const RegimeParams& p, const ScoreSpec& score) {
    require_sparse(p, score);
    if (phi.empty()) return 0.0;
    double total = 0.0;
    for (const auto& comp : connected_components(phi, p.r_n))
        total += score.evaluate(rescaled_component(phi, comp, p.r_n));
    return total / p.sparse_speed();
}

double sparse_H_tilde(const PointSet& phi, const RegimeParams& p,
                      const ScoreSpec& score) {
    require_sparse(p, score);
    const int k0 = p.k0;
    const std::size_t n = phi.size();
    if (n < static_cast<std::size_t>(k0)) return 0.0;
    SpatialIndex idx(phi, p.r_n);

    const double reach = k0 * p.r_n;  // diameter cap of an admissible subset
    double total = 0.0;
    std::vector<std::uint32_t> cand;
    std::vector<std::uint32_t> subset(k0);

    // Enumerate k0-subsets whose lowest index is the pivot, all members
    // within the diameter cap of the pivot.
    for (std::uint32_t pivot = 0; pivot < n; ++pivot) {
        cand.clear();
        for (std::uint32_t j : idx.points_in_ball(phi.point(pivot), reach))
            if (j > pivot) cand.push_back(j);
        if (cand.size() + 1 < static_cast<std::size_t>(k0)) continue;

        std::vector<int> pick(k0 - 1);
        for (int i = 0; i < k0 - 1; ++i) pick[i] = i;
        const int m = static_cast<int>(cand.size());
        bool more = (k0 == 1) || (m >= k0 - 1);
        while (more) {
            subset[0] = pivot;
            for (int i = 0; i < k0 - 1; ++i) subset[i + 1] = cand[pick[i]];

            bool ok = true;
            // diameter <= k0 r_n
            for (int i = 0; i < k0 && ok; ++i)
                for (int j = i + 1; j < k0; ++j)
                    if (torus_distance(phi, subset[i], subset[j]) > reach) {
                        ok = false;
                        break;
                    }
            // isolation: no outside point strictly within r_n of a member
            for (int i = 0; i < k0 && ok; ++i) {
                for (std::uint32_t z : idx.points_in_ball(phi.point(subset[i]), p.r_n)) {
                    if (std::find(subset.begin(), subset.end(), z) != subset.end())
                        continue;
                    if (torus_distance(phi, subset[i], z) < p.r_n) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) total += score.evaluate(rescaled_component(phi, subset, p.r_n));

            if (k0 == 1) break;
            int pos = k0 - 2;
            while (pos >= 0 && pick[pos] == m - (k0 - 1 - pos)) --pos;
            if (pos < 0) break;
            ++pick[pos];
            for (int i = pos + 1; i < k0 - 1; ++i) pick[i] = pick[i - 1] + 1;
        }
    }
    return total / p.sparse_speed();
}

namespace {

double knn_score_sum(const SpatialIndex& idx, const PointSet& phi, std::size_t i,
                     int k, double alpha, double scale) {
    const double rk = idx.knn_radius(phi.point(i), k, static_cast<std::int64_t>(i));
    if (!std::isfinite(rk)) return kInf;
    double s = 0.0;
    for (std::uint32_t j : idx.points_in_ball(phi.point(i), rk)) {
        if (j == i) continue;
        s += std::pow(scale * torus_distance(phi, i, j), alpha);
    }
    return s;
}

}  // namespace

double critical_knn_H(const PointSet& phi, const RegimeParams& p) {
    if (p.k < 1) throw std::invalid_argument("critical_knn_H: k must be >= 1");
    if (phi.size() <= static_cast<std::size_t>(p.k)) return kInf;
    const double scale = std::pow(p.n, 1.0 / p.d);
    SpatialIndex idx(phi);
    double total = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double s = knn_score_sum(idx, phi, i, p.k, p.alpha, scale);
        if (!std::isfinite(s)) return kInf;
        total += s;
    }
    return total / p.n;
}

double knn_cutoff_cap(const RegimeParams& p) { return std::exp(p.M); }

double contact_cutoff_cap(const RegimeParams& p) { return std::pow(p.M, p.alpha); }

double critical_cutoff_H(const PointSet& phi, const RegimeParams& p, double g_of_M) {
    if (!(p.M_prime > p.M))
        throw std::invalid_argument("critical_cutoff_H: requires M' > M");
    if (g_of_M <= 0.0) return 0.0;
    const double scale = std::pow(p.n, 1.0 / p.d);
    const double trunc = p.M_prime / scale;  // rescaled radius M' on the torus
    SpatialIndex idx(phi, std::min(trunc, 1.0));
    double total = 0.0;
    std::vector<double> dists;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        dists.clear();
        for (std::uint32_t j : idx.points_in_ball(phi.point(i), trunc)) {
            if (j == i) continue;
            dists.push_back(torus_distance(phi, i, j));
        }
        double s;
        if (dists.size() < static_cast<std::size_t>(p.k)) {
            s = g_of_M;  // infinite sentinel capped by g(M)
        } else {
            std::nth_element(dists.begin(), dists.begin() + (p.k - 1), dists.end());
            const double rk = dists[p.k - 1];
            s = 0.0;
            for (double dd : dists)
                if (dd <= rk) s += std::pow(scale * dd, p.alpha);
            s = std::min(s, g_of_M);
        }
        total += s;
    }
    return total / p.n;
}

namespace {

double contact_quadrature(const PointSet& phi, const RegimeParams& p, int res) {
    const double scale = std::pow(p.n, 1.0 / p.d);
    SpatialIndex idx(phi);
    std::vector<double> x(p.d);
    std::vector<int> cell(p.d, 0);
    double total = 0.0;
    long cells = 1;
    for (int a = 0; a < p.d; ++a) cells *= res;
    for (long c = 0; c < cells; ++c) {
        long b = c;
        for (int a = p.d - 1; a >= 0; --a) {
            x[a] = (static_cast<double>(b % res) + 0.5) / res;
            b /= res;
        }
        total += std::pow(scale * idx.contact_distance(x), p.alpha);
    }
    return total / static_cast<double>(cells);
}

}  // namespace

ContactValue contact_H(const PointSet& phi, const RegimeParams& p, int resolution) {
    if (resolution < 2)
        throw std::invalid_argument("contact_H: resolution must be >= 2");
    ContactValue out;
    if (phi.empty()) {
        out.value = kInf;
        out.refinement_delta = kInf;
        return out;
    }
    out.value = contact_quadrature(phi, p, resolution);
    const double coarse = contact_quadrature(phi, p, std::max(2, resolution / 2));
    out.refinement_delta = std::fabs(out.value - coarse);
    return out;
}

double dense_H(const PointSet& phi, const RegimeParams& p) {
    if (p.a_n <= 0.0) throw std::invalid_argument("dense_H: a_n must be > 0");
    const double kd = unit_ball_volume(p.d);
    SpatialIndex idx(phi);
    double total = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double rk = idx.knn_radius(phi.point(i), p.k, static_cast<std::int64_t>(i));
        const double v = p.n * kd * std::pow(rk, p.d) - p.a_n - p.s0;
        if (v > 0.0) total += v;  // +inf radii propagate to +inf
    }
    return total / p.dense_speed();
}

DiscreteMeasure dense_empirical_measure(const PointSet& phi, const RegimeParams& p) {
    if (p.a_n <= 0.0)
        throw std::invalid_argument("dense_empirical_measure: a_n must be > 0");
    const double kd = unit_ball_volume(p.d);
    const double mass = 1.0 / p.dense_speed();
    SpatialIndex idx(phi);
    DiscreteMeasure mu;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double rk = idx.knn_radius(phi.point(i), p.k, static_cast<std::int64_t>(i));
        const double loc = p.n * kd * std::pow(rk, p.d) - p.a_n;
        if (loc >= p.s0) mu.atoms.emplace_back(loc, mass);
    }
    return mu;
}

}  // namespace geomld
