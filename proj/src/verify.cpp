#include "geomld/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geomld/components.hpp"
#include "geomld/parallel.hpp"
#include "geomld/point_process.hpp"
#include "geomld/rates.hpp"
#include "geomld/spatial_index.hpp"
#include "geomld/sprinkling.hpp"

namespace geomld {

namespace {

BoundCheck hard_lower(std::string name, double empirical, double bound) {
    BoundCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.bound = bound;
    c.upper = false;
    c.hard = true;
    c.pass = empirical >= bound;
    c.excess_ses = 0.0;
    return c;
}

// brute-force geometry mismatches on one random configuration
long geometry_mismatches(const PointSet& ps, CounterRng& rng) {
    long bad = 0;
    const std::size_t n = ps.size();
    SpatialIndex idx(ps);
    std::vector<double> center(ps.dim);
    for (int probe = 0; probe < 4; ++probe) {
        for (double& c : center) c = rng.next_unit();
        const double r = 0.02 + 0.2 * rng.next_unit();
        auto got = idx.points_in_ball(center, r);
        std::vector<std::uint32_t> want;
        for (std::size_t i = 0; i < n; ++i)
            if (torus_distance(center, ps.point(i)) <= r)
                want.push_back(static_cast<std::uint32_t>(i));
        if (got != want) ++bad;
    }
    if (n >= 2) {
        const std::size_t i = rng.next_below(n);
        std::vector<double> d;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d.push_back(torus_distance(ps, i, j));
        std::sort(d.begin(), d.end());
        const int k = 1 + static_cast<int>(rng.next_below(3));
        const double want = d.size() >= static_cast<std::size_t>(k) ? d[k - 1] : kInf;
        const double got = idx.knn_radius(ps.point(i), k, static_cast<std::int64_t>(i));
        if (std::isfinite(want) != std::isfinite(got) ||
            (std::isfinite(want) && std::fabs(want - got) > 1e-13))
            ++bad;
        double cmin = kInf;
        for (std::size_t j = 0; j < n; ++j)
            cmin = std::min(cmin, torus_distance(center, ps.point(j)));
        if (std::fabs(idx.contact_distance(center) - cmin) > 1e-13) ++bad;
    }
    // components against the all-pairs union-find
    const double r = 0.03 + 0.1 * rng.next_unit();
    const auto got = connected_components(ps, r);
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (torus_distance(ps, i, j) <= r)
                uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    std::size_t members = 0;
    for (const auto& comp : got) {
        members += comp.size();
        for (std::size_t t = 1; t < comp.size(); ++t)
            if (uf.find(comp[t]) != uf.find(comp[0])) ++bad;
    }
    if (members != n) ++bad;
    if (got.size() != uf.component_count()) ++bad;
    return bad;
}

}  // namespace

VerifySummary run_verify_suite(std::uint64_t seed, long replicates, int threads) {
    VerifySummary out;
    auto& checks = out.checks;
    const StreamKey root{seed, "verify", 0};

    // 1. geometry oracle equivalence
    {
        CounterRng rng(root.with_lane("geometry"));
        long mismatches = 0;
        for (int cfg = 0; cfg < 12; ++cfg) {
            const int d = 1 + cfg % 3;
            const double n = 20.0 + 60.0 * rng.next_unit();
            const PointSet ps =
                sample_poisson(n, d, root.with_lane("geom_cfg").with_replicate(cfg));
            mismatches += geometry_mismatches(ps, rng);
        }
        checks.push_back(make_hard_check("geometry_oracle_mismatches",
                                         static_cast<double>(mismatches), 0.0));
    }

    // 2. deterministic kNN sprinkling bounds
    {
        RegimeParams p;
        p.d = 2;
        p.n = 120.0;
        long count_viol = 0, radius_viol = 0;
        const long samples = std::max<long>(20, replicates / 50);
        for (long t = 0; t < samples; ++t) {
            const PointSet P =
                sample_poisson(p.n, p.d, root.with_lane("jbound").with_replicate(t));
            for (int k : {1, 2}) {
                for (double M : {3.0, 5.0}) {
                    p.k = k;
                    p.M = M;
                    const auto J = find_large_radius_nodes(P, p);
                    if (static_cast<double>(J.size()) > large_radius_count_bound(p))
                        ++count_viol;
                    auto [unioned, rep] = knn_sprinkle(
                        P, p, root.with_lane("jsprinkle").with_replicate(t * 100 + k * 10 + static_cast<int>(M)));
                    if (!rep.target_event_holds) ++radius_viol;
                }
            }
        }
        checks.push_back(make_hard_check("knn_J_count_bound_violations",
                                         static_cast<double>(count_viol), 0.0));
        checks.push_back(make_hard_check("knn_post_radius_violations",
                                         static_cast<double>(radius_viol), 0.0));
    }

    // 3. ball-count expectation bounds
    for (double m : {10.0, 50.0}) {
        for (int l : {1, 2}) {
            checks.push_back(verify_ball_count_bound(
                1, m, l, 0.05, 1.0, std::max<long>(200, replicates / 4),
                root.with_lane("ballcount"), threads));
        }
    }

    // 4. bad-box probabilities
    {
        RegimeParams sp;
        sp.d = 1;
        sp.n = 100.0;
        sp.k0 = 2;
        sp.r_n = 1e-4;
        checks.push_back(verify_bad_box_probabilities(
            BadBoxRegime::Sparse, sp, std::max<long>(200, replicates / 4),
            root.with_lane("sparse_bb"), threads));

        RegimeParams de;
        de.d = 1;
        de.n = 2000.0;
        de.k = 1;
        de.a_n = std::log(de.n / 10.0);
        de.s0 = 0.0;
        de.M = 6.0;
        checks.push_back(verify_bad_box_probabilities(
            BadBoxRegime::Dense, de, std::max<long>(200, replicates / 4),
            root.with_lane("dense_bb"), threads));
    }

    // 5. sprinkling probability lower bound at estimable scale
    {
        RegimeParams p;
        p.d = 1;
        p.n = 8.0;
        p.k = 1;
        p.M = 5.0;
        const auto rows = verify_sprinkle_bound(p, 4, std::max<long>(1000, replicates),
                                                root.with_lane("lemma_sprinkle"), threads);
        int idx = 0;
        for (const auto& r : rows) {
            std::ostringstream name;
            name << "sprinkle_prob_cfg" << idx++;
            checks.push_back(
                make_lower_check(name.str(), r.p_hat, r.bound, r.se, 3.0));
        }
    }

    // 6. coupling distribution chi-squares (p-value floor 0.001)
    {
        RegimeParams p;
        p.d = 2;
        p.n = 200.0;
        p.M = 4.0;
        p.k0 = 2;
        p.r_n = 5.0 / 200.0;  // 5x5 sparse grid
        p.k = 1;
        p.a_n = std::log(200.0 / 16.0);  // 4x4 dense grid
        p.epsilon = 0.3;
        const long reps = std::max<long>(1000, replicates);
        const struct {
            CouplingBuilder b;
            const char* name;
        } builders[] = {
            {CouplingBuilder::IdentityPoisson, "chisq_identity"},
            {CouplingBuilder::Critical, "chisq_critical_union"},
            {CouplingBuilder::SparseResample, "chisq_sparse_resample"},
            {CouplingBuilder::DenseResample, "chisq_dense_resample"},
        };
        for (const auto& b : builders) {
            const auto rep = coupling_distribution_test(
                b.b, p, 4, reps, root.with_lane(b.name), threads);
            checks.push_back(hard_lower(b.name + std::string("_pvalue"), rep.p_value,
                                        0.001));
        }
    }

    // 7. dense sequential resampling hard invariant
    {
        RegimeParams p;
        p.d = 1;
        p.n = 1000.0;
        p.k = 1;
        p.a_n = std::log(100.0);
        p.M = 6.0;
        p.M0 = 6.0;
        long estar_true = 0, recheck_viol = 0;
        const long reps = std::max<long>(10, replicates / 200);
        for (long t = 0; t < reps; ++t) {
            const StreamKey rk = root.with_lane("dense_seq").with_replicate(t);
            const PointSet P = sample_poisson(p.n, p.d, rk.with_lane("P"));
            const PointSet Pp = sample_poisson(p.n, p.d, rk.with_lane("Pp"));
            const auto res = dense_sequential_resample(P, Pp, p, 24, rk);
            if (res.e_star) {
                ++estar_true;
                for (const auto& st : res.states)
                    if (!st.bounded) ++recheck_viol;
            }
        }
        checks.push_back(make_hard_check("dense_estar_boundedness_violations",
                                         static_cast<double>(recheck_viol), 0.0));
        checks.push_back(hard_lower("dense_estar_observed",
                                    static_cast<double>(estar_true), 1.0));
    }

    // 8. rate-function identities
    {
        const auto sol = dense_rate(0.25, 1, 0.0);
        checks.push_back(make_hard_check("dense_rate_quarter_abs_err",
                                         std::fabs(sol.rate - 0.25), 1e-6));
        const double bf = dense_rate_bruteforce(0.3, 1, 0.0, 2000, 40.0);
        checks.push_back(make_hard_check(
            "dense_rate_vs_bruteforce_abs_err",
            std::fabs(dense_rate(0.3, 1, 0.0).rate - bf), 1e-3));
        checks.push_back(make_hard_check("sparse_rate_zero_at_mu",
                                         std::fabs(sparse_clique_rate(1.0, 1.0)), 0.0));
        const double expect = 0.5 * std::log(0.5) + 0.5;
        checks.push_back(make_hard_check(
            "sparse_rate_half_abs_err",
            std::fabs(sparse_clique_rate(0.5, 1.0) - expect), 1e-12));
        checks.push_back(make_hard_check(
            "knn_tail_identity_abs_err",
            std::fabs(knn_tail_probability(2.0, 3) - 5.0 * std::exp(-2.0)), 1e-12));
    }

    for (const auto& c : checks) {
        if (!c.pass) {
            if (c.hard)
                out.hard_failure = true;
            else
                out.stat_failure = true;
        }
    }
    out.csv = bound_checks_to_csv(checks);
    return out;
}

}  // namespace geomld
