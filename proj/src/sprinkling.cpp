#include "geomld/sprinkling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "geomld/spatial_index.hpp"

namespace geomld {

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// uniform point in the torus ball of radius r around center, by rejection
// from the enclosing cube
void uniform_in_ball(CounterRng& rng, std::span<const double> center, double r,
                     std::span<double> out) {
    const int d = static_cast<int>(center.size());
    for (;;) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            const double delta = rng.uniform(-r, r);
            out[a] = center[a] + delta;
            s += delta * delta;
        }
        if (s <= r * r) {
            for (int a = 0; a < d; ++a) out[a] = wrap01(out[a]);
            return;
        }
    }
}

// displacement x -> y is lexicographically negative (y precedes x on the
// torus chart centered at x)
bool lex_precedes(std::span<const double> x, std::span<const double> y) {
    const int d = static_cast<int>(x.size());
    std::vector<double> delta(d);
    torus_displacement(x, y, delta);
    for (int a = 0; a < d; ++a) {
        if (delta[a] < 0.0) return true;
        if (delta[a] > 0.0) return false;
    }
    return false;
}

}  // namespace

std::vector<std::uint32_t> find_large_radius_nodes(const PointSet& phi,
                                                   const RegimeParams& p) {
    if (p.k < 1 || p.M <= 0.0)
        throw std::invalid_argument("find_large_radius_nodes: need k >= 1, M > 0");
    const double mn = p.M * std::pow(p.n, -1.0 / p.d);
    SpatialIndex idx(phi);
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        // R_k > M_n iff fewer than k other points within M_n
        if (!idx.has_k_within(phi.point(i), mn, p.k, static_cast<std::int64_t>(i)))
            out.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

double large_radius_count_bound(const RegimeParams& p) {
    return p.k * std::pow(2.0, p.d) * p.n /
           (unit_ball_volume(p.d) * std::pow(p.M, p.d));
}

std::vector<std::uint32_t> distinguished_subset(const std::vector<std::uint32_t>& J,
                                                const PointSet& phi,
                                                const RegimeParams& p) {
    const double u = std::pow(p.n, -1.0 / p.d);
    SpatialIndex idx(phi, u);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i : J) {
        bool minimal = true;
        for (std::uint32_t j : idx.points_in_ball(phi.point(i), u)) {
            if (j == i) continue;
            if (lex_precedes(phi.point(i), phi.point(j))) {
                minimal = false;
                break;
            }
        }
        if (minimal) out.push_back(i);
    }
    return out;
}

std::pair<PointSet, SprinkleReport> knn_sprinkle(const PointSet& phi,
                                                 const RegimeParams& p,
                                                 const StreamKey& key) {
    if (p.M <= p.k)
        throw std::invalid_argument("knn_sprinkle: requires M > k");
    const double u = std::pow(p.n, -1.0 / p.d);
    const auto J = find_large_radius_nodes(phi, p);
    const auto D = distinguished_subset(J, phi, p);

    SprinkleReport rep;
    rep.bad_count = static_cast<long>(J.size());
    rep.inserted = PointSet(phi.dim);
    CounterRng rng(key.with_lane("knn_sprinkle"));
    std::vector<double> pt(phi.dim);
    for (std::uint32_t x : D) {
        for (int c = 0; c < p.k; ++c) {
            uniform_in_ball(rng, phi.point(x), u / 2.0, pt);
            rep.inserted.append_raw(pt);
        }
    }

    PointSet unioned(phi.dim);
    unioned.coords = phi.coords;
    unioned.coords.insert(unioned.coords.end(), rep.inserted.coords.begin(),
                          rep.inserted.coords.end());

    SpatialIndex idx(unioned);
    double worst = 0.0;
    auto post_radius = [&](std::size_t i) {
        return idx.knn_radius(unioned.point(i), p.k, static_cast<std::int64_t>(i));
    };
    for (std::uint32_t i : J) worst = std::max(worst, post_radius(i));
    for (std::size_t i = phi.size(); i < unioned.size(); ++i)
        worst = std::max(worst, post_radius(i));
    rep.max_post_radius = worst;
    rep.target_event_holds = worst <= (p.k + 1) * u;

    if (p.M_prime > p.M) {
        const double g = knn_cutoff_cap(p);
        rep.excess = critical_cutoff_H(unioned, p, g) - critical_cutoff_H(phi, p, g);
    } else {
        rep.excess = nan_value();
    }
    return {std::move(unioned), std::move(rep)};
}

std::pair<PointSet, SprinkleReport> contact_sprinkle(const PointSet& phi,
                                                     const RegimeParams& p,
                                                     const StreamKey& key) {
    if (std::log(p.M) < 2.0)
        throw std::invalid_argument("contact_sprinkle: requires log M >= 2");
    const double u = std::pow(p.n, -1.0 / p.d);
    const double logm = std::log(p.M);
    const GridSpec grid = make_grid(p.d, 1.0 / (u * p.M / logm));
    const int sub_per_box = std::max(
        1, static_cast<int>(std::llround(grid.side() / (u * logm))));
    const double sub_side = grid.side() / sub_per_box;
    if (2.0 * u > sub_side)
        throw std::invalid_argument(
            "contact_sprinkle: insertion ball does not fit the subcube after "
            "rounding; increase M or n");

    const auto occupancy = points_by_box(phi, grid);
    SprinkleReport rep;
    rep.adjusted_grid_side = grid.side();
    rep.adjusted_sub_side = sub_side;
    rep.inserted = PointSet(phi.dim);
    CounterRng rng(key.with_lane("contact_sprinkle"));

    std::vector<double> lo(p.d), hi(p.d), center(p.d), pt(p.d);
    long sub_cells = 1;
    for (int a = 0; a < p.d; ++a) sub_cells *= sub_per_box;
    for (long b = 0; b < grid.box_count(); ++b) {
        if (!occupancy[b].empty()) continue;
        ++rep.bad_count;
        grid.box_bounds(b, lo, hi);
        for (long w = 0; w < sub_cells; ++w) {
            long t = w;
            for (int a = p.d - 1; a >= 0; --a) {
                center[a] = lo[a] + (static_cast<double>(t % sub_per_box) + 0.5) * sub_side;
                t /= sub_per_box;
            }
            uniform_in_ball(rng, center, u, pt);
            rep.inserted.append_raw(pt);
        }
    }

    PointSet unioned(phi.dim);
    unioned.coords = phi.coords;
    unioned.coords.insert(unioned.coords.end(), rep.inserted.coords.begin(),
                          rep.inserted.coords.end());

    // probe the contact distance on a grid twice as fine as the subgrid
    double worst = 0.0;
    if (!unioned.empty()) {
        SpatialIndex idx(unioned);
        const int probes = 2 * grid.per_axis * sub_per_box;
        long cells = 1;
        for (int a = 0; a < p.d; ++a) cells *= probes;
        std::vector<double> x(p.d);
        for (long c = 0; c < cells; ++c) {
            long t = c;
            for (int a = p.d - 1; a >= 0; --a) {
                x[a] = (static_cast<double>(t % probes) + 0.5) / probes;
                t /= probes;
            }
            worst = std::max(worst, idx.contact_distance(x));
        }
    } else {
        worst = kInf;
    }
    rep.max_post_radius = worst;
    rep.target_event_holds = worst <= p.M * u;

    if (p.M_prime > p.M) {
        // cut-off functional for representation B: capped midpoint quadrature
        const double g = contact_cutoff_cap(p);
        const double scale = std::pow(p.n, 1.0 / p.d);
        const int res = 4 * grid.per_axis * sub_per_box;
        auto capped = [&](const PointSet& cfg) {
            if (cfg.empty()) return g;
            SpatialIndex idx(cfg);
            long cells = 1;
            for (int a = 0; a < p.d; ++a) cells *= res;
            std::vector<double> x(p.d);
            double total = 0.0;
            for (long c = 0; c < cells; ++c) {
                long t = c;
                for (int a = p.d - 1; a >= 0; --a) {
                    x[a] = (static_cast<double>(t % res) + 0.5) / res;
                    t /= res;
                }
                total += std::min(
                    g, std::pow(scale * idx.contact_distance(x), p.alpha));
            }
            return total / static_cast<double>(cells);
        };
        rep.excess = capped(unioned) - capped(phi);
    } else {
        rep.excess = nan_value();
    }
    return {std::move(unioned), std::move(rep)};
}

double sprinkle_prob_lower_bound_log(long N_n, double n, double M, int m,
                                     double V, long I) {
    if (M <= 1.0 || V <= 0.0 || m < 0)
        throw std::invalid_argument("sprinkle_prob_lower_bound: need M > 1, V > 0, m >= 0");
    double lp = static_cast<double>(N_n) * std::log1p(-1.0 / M) - n / M;
    lp += static_cast<double>(I) *
          (m * std::log(V / M) - std::lgamma(m + 1.0) - V / M);
    return lp;
}

double sprinkle_prob_lower_bound(long N_n, double n, double M, int m, double V,
                                 long I) {
    return std::exp(sprinkle_prob_lower_bound_log(N_n, n, M, m, V, I));
}

GridSpec sparse_grid(const RegimeParams& p) {
    return make_grid(p.d, std::pow(p.sparse_speed(), 1.0 / p.d));
}

std::vector<bool> sparse_bad_boxes(const PointSet& P, const RegimeParams& p,
                                   const GridSpec& grid) {
    const double R = std::pow(2.0, p.d) * p.k0 * p.r_n;
    SpatialIndex idx(P, R);
    std::vector<bool> bad(grid.box_count(), false);
    for (std::size_t i = 0; i < P.size(); ++i) {
        // count includes the point itself
        if (idx.has_k_within(P.point(i), R, p.k0 + 1))
            bad[grid.box_of(P.point(i))] = true;
    }
    return bad;
}

std::pair<PointSet, SprinkleReport> sparse_resample(const PointSet& P,
                                                    const PointSet& P_prime,
                                                    const RegimeParams& p,
                                                    const StreamKey& key,
                                                    const ScoreSpec* score) {
    (void)key;  // the targeted construction consumes no randomness itself
    const GridSpec grid = sparse_grid(p);
    const auto bad = sparse_bad_boxes(P, p, grid);
    PointSet P2 = resample_boxes(P, P_prime, bad, grid);

    SprinkleReport rep;
    rep.adjusted_grid_side = grid.side();
    rep.bad_count = static_cast<long>(std::count(bad.begin(), bad.end(), true));
    rep.inserted = PointSet(P.dim);

    const double R = std::pow(2.0, p.d) * p.k0 * p.r_n;
    const auto prime_boxes = points_by_box(P_prime, grid);
    SpatialIndex prime_idx(P_prime, R);
    bool target = true;
    for (long b = 0; b < grid.box_count(); ++b) {
        if (!bad[b]) continue;
        for (std::uint32_t i : prime_boxes[b]) {
            rep.inserted.append_raw(P_prime.point(i));
            // within-box count including the point itself must stay <= k0-1
            std::size_t cnt = 0;
            for (std::uint32_t j : prime_idx.points_in_ball(P_prime.point(i), R))
                if (grid.box_of(P_prime.point(j)) == b) ++cnt;
            if (cnt > static_cast<std::size_t>(p.k0 - 1)) target = false;
        }
    }
    rep.target_event_holds = target;

    double worst = 0.0;
    if (rep.bad_count > 0 && !P2.empty()) {
        SpatialIndex idx2(P2);
        for (std::size_t i = 0; i < P2.size(); ++i) {
            if (!bad[grid.box_of(P2.point(i))]) continue;
            worst = std::max(
                worst, idx2.knn_radius(P2.point(i), p.k0, static_cast<std::int64_t>(i)));
        }
    }
    rep.max_post_radius = worst;
    rep.excess = score ? sparse_H(P2, p, *score) - sparse_H(P, p, *score)
                       : nan_value();
    return {std::move(P2), std::move(rep)};
}

GridSpec dense_grid(const RegimeParams& p) {
    return make_grid(p.d, std::pow(p.dense_speed(), 1.0 / p.d));
}

double dense_score_radius(const RegimeParams& p, double M) {
    const double m = M + p.a_n + p.s0;
    if (m <= 0.0) return 0.0;
    return std::pow(m / (p.n * unit_ball_volume(p.d)), 1.0 / p.d);
}

double dense_shell_width(const RegimeParams& p) {
    return std::pow((p.a_n + p.effective_w_n()) / (p.n * unit_ball_volume(p.d)),
                    1.0 / p.d);
}

namespace {

// (eta, M)-bounded on the region of `box` (optionally minus the shell):
// every point there has at least k other eta-points within the score radius.
bool bounded_on_box(const PointSet& eta, const SpatialIndex& idx, long box,
                    const GridSpec& grid, const RegimeParams& p, double M,
                    bool restrict_shell, double shell) {
    const double rM = dense_score_radius(p, M);
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (grid.box_of(eta.point(i)) != box) continue;
        if (restrict_shell && grid.distance_to_box_boundary(eta.point(i)) <= shell)
            continue;
        if (rM <= 0.0) return false;  // every point scores above M
        if (!idx.has_k_within(eta.point(i), rM, p.k, static_cast<std::int64_t>(i)))
            return false;
    }
    return true;
}

}  // namespace

bool dense_bounded_check(const PointSet& eta, long box, const GridSpec& grid,
                         const RegimeParams& p, double M, bool restrict_shell) {
    SpatialIndex idx(eta, dense_score_radius(p, M));
    return bounded_on_box(eta, idx, box, grid, p, M, restrict_shell,
                          dense_shell_width(p));
}

DenseSequentialContext::DenseSequentialContext(const PointSet& P,
                                               const PointSet& P_prime,
                                               const RegimeParams& p)
    : P_(&P), Pp_(&P_prime), params_(p), grid_(dense_grid(p)) {
    if (p.a_n <= 0.0)
        throw std::invalid_argument("dense resampling: a_n must be > 0");
    if (dense_score_radius(p, p.M) > grid_.side())
        throw std::invalid_argument(
            "dense resampling: score radius exceeds the box side; the "
            "neighborhood locality of the goodness thresholds would fail");
    boxes_P_ = points_by_box(P, grid_);
    boxes_Pp_ = points_by_box(P_prime, grid_);
}

double DenseSequentialContext::threshold_b(long j, long i) const {
    long c = 0;
    for (long s : grid_.neighborhood(i))
        if (s <= j) ++c;
    return std::exp(-params_.M * std::pow(2.0, -1.0 - static_cast<double>(c)));
}

GoodnessEstimate DenseSequentialContext::goodness(
    long j, long i, const std::vector<BoxSource>& resolved_below_j, BoxSource eta,
    int samples, const StreamKey& key) const {
    if (samples < 1)
        throw std::invalid_argument("dense goodness: samples must be >= 1");
    GoodnessEstimate out;
    out.threshold_b = threshold_b(j, i);

    const auto nb = grid_.neighborhood(i);
    std::vector<long> unfixed;
    for (long s : nb)
        if (s > j) unfixed.push_back(s);
    out.deterministic = unfixed.empty();

    // fixed part of the neighborhood configuration
    PointSet fixed(P_->dim);
    for (long s : nb) {
        if (s > j) continue;
        const bool from_prime =
            (s == j) ? (eta == BoxSource::Resampled)
                     : (resolved_below_j[s] == BoxSource::Resampled);
        const PointSet& src = from_prime ? *Pp_ : *P_;
        const auto& members = from_prime ? boxes_Pp_[s] : boxes_P_[s];
        for (std::uint32_t t : members) fixed.append_raw(src.point(t));
    }

    const double box_vol = std::pow(grid_.side(), params_.d);
    const double shell = dense_shell_width(params_);
    std::vector<double> lo(params_.d), hi(params_.d), pt(params_.d);

    const int draws = out.deterministic ? 1 : samples;
    long hits = 0;
    for (int s = 0; s < draws; ++s) {
        PointSet cfg = fixed;
        CounterRng rng(key.with_replicate(s));
        for (long ub : unfixed) {
            grid_.box_bounds(ub, lo, hi);
            const long cnt = poisson_count(rng, params_.n * box_vol);
            for (long c = 0; c < cnt; ++c) {
                for (int a = 0; a < params_.d; ++a)
                    pt[a] = rng.uniform(lo[a], hi[a]);
                cfg.append(pt);
            }
        }
        SpatialIndex idx(cfg, dense_score_radius(params_, params_.M));
        if (bounded_on_box(cfg, idx, i, grid_, params_, params_.M, false, shell))
            ++hits;
    }
    out.estimate = static_cast<double>(hits) / draws;
    out.std_err = out.deterministic
                      ? 0.0
                      : std::sqrt(out.estimate * (1.0 - out.estimate) / draws);
    return out;
}

bool DenseSequentialContext::box_good(long j,
                                      const std::vector<BoxSource>& resolved_below_j,
                                      BoxSource eta, int samples,
                                      const StreamKey& key, double* binding_estimate,
                                      double* binding_threshold) const {
    bool good = true;
    double worst_slack = std::numeric_limits<double>::infinity();
    double best_est = 1.0, best_thr = 0.0;
    for (long i : grid_.neighborhood(j)) {
        std::ostringstream lane;
        lane << "a_" << i << "_" << j;
        const auto g = goodness(j, i, resolved_below_j, eta, samples,
                                key.with_lane(lane.str()));
        const double thr = 1.0 - g.threshold_b;
        const double slack = g.estimate - thr;
        if (slack < worst_slack) {
            worst_slack = slack;
            best_est = g.estimate;
            best_thr = thr;
        }
        if (g.estimate < thr) good = false;
    }
    if (binding_estimate) *binding_estimate = best_est;
    if (binding_threshold) *binding_threshold = best_thr;
    return good;
}

bool DenseSequentialContext::shell_interior_bounded(long j) const {
    SpatialIndex idx(*Pp_, dense_score_radius(params_, params_.M0));
    return bounded_on_box(*Pp_, idx, j, grid_, params_, params_.M0, true,
                          dense_shell_width(params_));
}

DenseResampleResult dense_sequential_resample(const PointSet& P,
                                              const PointSet& P_prime,
                                              const RegimeParams& p, int samples,
                                              const StreamKey& key) {
    DenseSequentialContext ctx(P, P_prime, p);
    const GridSpec& grid = ctx.grid();
    const long B = grid.box_count();

    DenseResampleResult res;
    res.e_star = true;
    std::vector<BoxSource> resolved(B, BoxSource::Original);
    std::vector<bool> replace(B, false);

    for (long j = 0; j < B; ++j) {
        BoxState st;
        st.box_index = j;
        double est = 0.0, thr = 0.0;
        const bool goodP = ctx.box_good(j, resolved, BoxSource::Original, samples,
                                        key.with_lane("gP"), &est, &thr);
        if (goodP) {
            resolved[j] = BoxSource::Original;
            st.resampled = false;
            st.good = true;
            st.estimate = est;
            st.threshold = thr;
        } else {
            resolved[j] = BoxSource::Resampled;
            replace[j] = true;
            st.resampled = true;
            const bool goodPp = ctx.box_good(j, resolved, BoxSource::Resampled,
                                             samples, key.with_lane("gPp"), &est, &thr);
            const bool ejb = ctx.shell_interior_bounded(j);
            st.good = goodPp;
            st.estimate = est;
            st.threshold = thr;
            if (!(goodPp && ejb)) res.e_star = false;
        }
        res.states.push_back(st);
    }

    res.P2 = resample_boxes(P, P_prime, replace, grid);

    SpatialIndex idx2(res.P2, dense_score_radius(p, p.M));
    const double shell = dense_shell_width(p);
    for (long j = 0; j < B; ++j)
        res.states[j].bounded =
            bounded_on_box(res.P2, idx2, j, grid, p, p.M, false, shell);

    SprinkleReport rep;
    rep.adjusted_grid_side = grid.side();
    rep.bad_count = static_cast<long>(std::count(replace.begin(), replace.end(), true));
    rep.inserted = PointSet(P.dim);
    const auto prime_boxes = points_by_box(P_prime, grid);
    for (long b = 0; b < B; ++b)
        if (replace[b])
            for (std::uint32_t i : prime_boxes[b])
                rep.inserted.append_raw(P_prime.point(i));
    rep.target_event_holds = res.e_star;
    double worst = 0.0;
    for (std::size_t i = 0; i < res.P2.size(); ++i)
        worst = std::max(worst, idx2.knn_radius(res.P2.point(i), p.k,
                                                static_cast<std::int64_t>(i)));
    rep.max_post_radius = worst;
    rep.excess = dense_H(res.P2, p) - dense_H(P, p);
    res.report = std::move(rep);
    return res;
}

std::pair<double, double> dense_error_terms(const PointSet& P2,
                                            const std::vector<long>& bad_boxes,
                                            const RegimeParams& p) {
    const GridSpec grid = dense_grid(p);
    const double tn = dense_shell_width(p);
    const double kd = unit_ball_volume(p.d);
    std::vector<bool> bad(grid.box_count(), false);
    for (long b : bad_boxes) bad[b] = true;

    SpatialIndex idx(P2);
    double shell_sum = 0.0, bad_sum = 0.0;
    for (std::size_t i = 0; i < P2.size(); ++i) {
        const double rk = idx.knn_radius(P2.point(i), p.k, static_cast<std::int64_t>(i));
        const double xi =
            std::max(0.0, p.n * kd * std::pow(rk, p.d) - p.a_n - p.s0);
        if (grid.distance_to_box_boundary(P2.point(i)) <= tn)
            shell_sum += std::min(p.M, xi);
        if (bad[grid.box_of(P2.point(i))]) bad_sum += std::min(p.M0, xi);
    }
    const double rho = p.dense_speed();
    return {shell_sum / rho, bad_sum / rho};
}

std::string box_states_to_csv(const std::vector<BoxState>& states) {
    std::ostringstream os;
    os << "box_index,source,bounded,good,estimate,threshold\n";
    for (const auto& s : states) {
        os << s.box_index << ',' << (s.resampled ? "resampled" : "original") << ','
           << (s.bounded ? 1 : 0) << ',' << (s.good ? 1 : 0) << ',' << s.estimate
           << ',' << s.threshold << "\n";
    }
    return os.str();
}

}  // namespace geomld
