#include "geomld/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "geomld/parallel.hpp"
#include "geomld/point_process.hpp"
#include "geomld/spatial_index.hpp"
#include "geomld/sprinkling.hpp"

namespace geomld {

namespace {

BoundCheck finish_check(BoundCheck c) {
    c.excess_ses = c.se > 0.0 ? (c.upper ? (c.empirical - c.bound) / c.se
                                         : (c.bound - c.empirical) / c.se)
                              : (c.upper ? (c.empirical > c.bound ? kInf : -kInf)
                                         : (c.empirical < c.bound ? kInf : -kInf));
    if (c.hard) {
        c.pass = c.upper ? c.empirical <= c.bound : c.empirical >= c.bound;
        c.warn = false;
    } else {
        c.pass = c.excess_ses <= c.slack_ses;
        c.warn = !c.pass ? false : (c.excess_ses > 3.0 && c.excess_ses <= 4.0);
    }
    return c;
}

}  // namespace

BoundCheck make_upper_check(std::string name, double empirical, double bound,
                            double se, double slack) {
    BoundCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.bound = bound;
    c.se = se;
    c.slack_ses = slack;
    c.upper = true;
    return finish_check(c);
}

BoundCheck make_lower_check(std::string name, double empirical, double bound,
                            double se, double slack) {
    BoundCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.bound = bound;
    c.se = se;
    c.slack_ses = slack;
    c.upper = false;
    return finish_check(c);
}

BoundCheck make_hard_check(std::string name, double empirical, double bound) {
    BoundCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.bound = bound;
    c.se = 0.0;
    c.slack_ses = 0.0;
    c.upper = true;
    c.hard = true;
    return finish_check(c);
}

std::string bound_checks_to_csv(const std::vector<BoundCheck>& checks) {
    std::ostringstream os;
    os << "name,empirical,bound,se,slack_ses,excess_ses,side,hard,pass,warn\n";
    os.precision(12);
    for (const auto& c : checks) {
        os << c.name << ',' << c.empirical << ',' << c.bound << ',' << c.se << ','
           << c.slack_ses << ',' << c.excess_ses << ','
           << (c.upper ? "upper" : "lower") << ',' << (c.hard ? 1 : 0) << ','
           << (c.pass ? 1 : 0) << ',' << (c.warn ? 1 : 0) << "\n";
    }
    return os.str();
}

double evaluate_tail_functional(TailFunctional f, const PointSet& phi,
                                const RegimeParams& p) {
    switch (f) {
        case TailFunctional::SparseClique: {
            static thread_local int cached_k0 = -1;
            static thread_local int cached_d = -1;
            static thread_local ScoreSpec score;
            if (cached_k0 != p.k0 || cached_d != p.d) {
                score = clique_count_score(p.d, p.k0);
                cached_k0 = p.k0;
                cached_d = p.d;
            }
            return sparse_H(phi, p, score);
        }
        case TailFunctional::DenseKnn:
            return dense_H(phi, p);
        case TailFunctional::ConstantZero:
            return 0.0;
    }
    throw std::logic_error("evaluate_tail_functional: unknown functional");
}

double tail_speed(TailFunctional f, const RegimeParams& p) {
    switch (f) {
        case TailFunctional::SparseClique:
            return p.sparse_speed();
        case TailFunctional::DenseKnn:
            return p.dense_speed();
        case TailFunctional::ConstantZero:
            return 1.0;
    }
    throw std::logic_error("tail_speed: unknown functional");
}

EstimationResult estimate_lower_tail(TailFunctional f, const RegimeParams& p,
                                     double a, long replicates,
                                     const StreamKey& key, int threads) {
    if (replicates < 100)
        throw std::invalid_argument("estimate_lower_tail: replicates must be >= 100");
    const StreamKey base = key.with_lane("lower_tail");
    std::vector<unsigned char> hit(replicates, 0);
    parallel_for(replicates, threads, [&](long i) {
        const PointSet phi = sample_poisson(p.n, p.d, base.with_replicate(i));
        hit[i] = evaluate_tail_functional(f, phi, p) <= a ? 1 : 0;
    });
    long count = 0;
    for (long i = 0; i < replicates; ++i) count += hit[i];

    EstimationResult r;
    r.replicates = replicates;
    r.p_hat = static_cast<double>(count) / replicates;
    r.std_err = std::sqrt(r.p_hat * (1.0 - r.p_hat) / replicates);
    r.speed = tail_speed(f, p);
    r.normalized_log = r.p_hat > 0.0 ? -std::log(r.p_hat) / r.speed : kInf;
    return r;
}

std::vector<CurveRow> scaling_curve(TailFunctional f,
                                    const std::vector<RegimeParams>& params_list,
                                    double a, long replicates,
                                    const StreamKey& key, int threads) {
    std::vector<CurveRow> rows;
    int idx = 0;
    for (const auto& p : params_list) {
        std::ostringstream lane;
        lane << "curve_" << idx++;
        CurveRow row;
        row.result =
            estimate_lower_tail(f, p, a, replicates, key.with_lane(lane.str()), threads);
        row.speed = row.result.speed;
        row.degenerate = row.result.p_hat == 0.0;
        rows.push_back(row);
    }
    return rows;
}

BoundCheck verify_ball_count_bound(int d, double m, int l, double r,
                                   double box_volume, long replicates,
                                   const StreamKey& key, int threads) {
    if (l < 1) throw std::invalid_argument("verify_ball_count_bound: l must be >= 1");
    const double side = std::pow(box_volume, 1.0 / d);
    if (side > 1.0)
        throw std::invalid_argument("verify_ball_count_bound: box exceeds the torus");
    const StreamKey base = key.with_lane("ball_count");
    std::vector<double> counts(replicates, 0.0);
    parallel_for(replicates, threads, [&](long t) {
        const PointSet phi = sample_poisson(m, d, base.with_replicate(t));
        SpatialIndex idx(phi, r);
        double c = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            auto pt = phi.point(i);
            bool in_box = true;
            for (int a = 0; a < d; ++a)
                if (pt[a] >= side) {
                    in_box = false;
                    break;
                }
            // P_m(B_r(X)) counts X itself
            if (in_box && idx.has_k_within(pt, r, l)) c += 1.0;
        }
        counts[t] = c;
    });
    double sum = 0.0, sumsq = 0.0;
    for (double c : counts) {
        sum += c;
        sumsq += c * c;
    }
    const double mean = sum / replicates;
    const double var = std::max(0.0, sumsq / replicates - mean * mean);
    const double se = std::sqrt(var / replicates);
    const double bound = std::pow(m, l) * std::pow(unit_ball_volume(d), l - 1) *
                         std::pow(r, static_cast<double>(l - 1) * d) * box_volume;
    std::ostringstream name;
    name << "ball_count_m" << m << "_l" << l << "_r" << r << "_d" << d;
    return make_upper_check(name.str(), mean, bound, se);
}

BoundCheck verify_bad_box_probabilities(BadBoxRegime regime, const RegimeParams& p,
                                        long replicates, const StreamKey& key,
                                        int threads) {
    if (regime == BadBoxRegime::Sparse) {
        const GridSpec grid = sparse_grid(p);
        const StreamKey base = key.with_lane("sparse_badbox");
        std::vector<double> fracs(replicates, 0.0);
        parallel_for(replicates, threads, [&](long t) {
            const PointSet P = sample_poisson(p.n, p.d, base.with_replicate(t));
            const auto bad = sparse_bad_boxes(P, p, grid);
            fracs[t] = static_cast<double>(std::count(bad.begin(), bad.end(), true)) /
                       static_cast<double>(grid.box_count());
        });
        double sum = 0.0, sumsq = 0.0;
        for (double f : fracs) {
            sum += f;
            sumsq += f * f;
        }
        const double mean = sum / replicates;
        const double var = std::max(0.0, sumsq / replicates - mean * mean);
        const double bound = std::pow(unit_ball_volume(p.d), p.k0) *
                             std::pow(std::pow(2.0, p.d) * p.k0,
                                      static_cast<double>(p.k0) * p.d) *
                             p.n * std::pow(p.r_n, p.d);
        return make_upper_check("sparse_bad_box_prob", mean, bound,
                                std::sqrt(var / replicates));
    }

    // dense: per-box frequency of failing (P_n, M)-boundedness
    const GridSpec grid = dense_grid(p);
    const StreamKey base = key.with_lane("dense_badbox");
    std::vector<double> fracs(replicates, 0.0);
    parallel_for(replicates, threads, [&](long t) {
        const PointSet P = sample_poisson(p.n, p.d, base.with_replicate(t));
        SpatialIndex idx(P, dense_score_radius(p, p.M));
        const double rM = dense_score_radius(p, p.M);
        std::vector<bool> violated(grid.box_count(), false);
        for (std::size_t i = 0; i < P.size(); ++i) {
            if (rM <= 0.0 ||
                !idx.has_k_within(P.point(i), rM, p.k, static_cast<std::int64_t>(i)))
                violated[grid.box_of(P.point(i))] = true;
        }
        fracs[t] =
            static_cast<double>(std::count(violated.begin(), violated.end(), true)) /
            static_cast<double>(grid.box_count());
    });
    double sum = 0.0, sumsq = 0.0;
    for (double f : fracs) {
        sum += f;
        sumsq += f * f;
    }
    const double mean = sum / replicates;
    const double var = std::max(0.0, sumsq / replicates - mean * mean);
    const double bound = 2.0 * p.k * std::exp(-p.M - p.s0);
    return make_upper_check("dense_bad_box_prob", mean, bound,
                            std::sqrt(var / replicates));
}

std::vector<SprinkleBoundRow> verify_sprinkle_bound(const RegimeParams& p,
                                                    int configs, long draws,
                                                    const StreamKey& key,
                                                    int threads) {
    if (p.M <= 1.0)
        throw std::invalid_argument("verify_sprinkle_bound: M must be > 1");
    std::vector<SprinkleBoundRow> rows(configs);
    const double u = std::pow(p.n, -1.0 / p.d);
    const double ball_vol = unit_ball_volume(p.d) * std::pow(u / 2.0, p.d);
    const double V = p.n * ball_vol;  // ball volume expressed as V/n

    for (int c = 0; c < configs; ++c) {
        const StreamKey ckey = key.with_lane("sprinkle_cfg").with_replicate(c);
        const PointSet P = sample_poisson(p.n, p.d, ckey);
        const auto J = find_large_radius_nodes(P, p);
        const auto D = distinguished_subset(J, P, p);
        const long N = static_cast<long>(P.size());
        const long I = static_cast<long>(D.size());

        std::vector<std::uint32_t> hit1(draws, 0), hit2(draws, 0), hit3(draws, 0);
        const StreamKey dkey = ckey.with_lane("draw");
        parallel_for(draws, threads, [&](long t) {
            const StreamKey rk = dkey.with_replicate(t);
            // part 1: thinning with survival 1 - 1/M retains everything
            CounterRng thin_rng(rk.with_lane("thin"));
            bool all_kept = true;
            for (long i = 0; i < N; ++i)
                if (!(thin_rng.next_unit() < 1.0 - 1.0 / p.M)) all_kept = false;
            // parts 2 and 3: the sprinkle process w.r.t. the insertion balls
            const PointSet S = sample_poisson(p.n / p.M, p.d, rk.with_lane("plus"));
            std::vector<long> per_ball(D.size(), 0);
            bool outside = false;
            for (std::size_t s = 0; s < S.size(); ++s) {
                bool inside = false;
                for (std::size_t b = 0; b < D.size(); ++b) {
                    if (torus_distance(S.point(s), P.point(D[b])) <= u / 2.0) {
                        ++per_ball[b];
                        inside = true;
                        break;  // balls are disjoint
                    }
                }
                if (!inside) outside = true;
            }
            bool exact_k = true;
            for (long cnt : per_ball)
                if (cnt != p.k) exact_k = false;
            hit1[t] = all_kept ? 1 : 0;
            hit2[t] = outside ? 0 : 1;
            hit3[t] = exact_k ? 1 : 0;
        });

        long c1 = 0, c2 = 0, c3 = 0, call = 0;
        for (long t = 0; t < draws; ++t) {
            c1 += hit1[t];
            c2 += hit2[t];
            c3 += hit3[t];
            call += (hit1[t] && hit2[t] && hit3[t]) ? 1 : 0;
        }

        SprinkleBoundRow row;
        row.N_n = N;
        row.I = I;
        row.bound = sprinkle_prob_lower_bound(N, p.n, p.M, p.k, V, I);
        row.p_hat = static_cast<double>(call) / draws;
        row.se = std::sqrt(row.bound * (1.0 - row.bound) / draws);
        row.pass = row.p_hat >= row.bound - 3.0 * row.se;
        row.part1_emp = static_cast<double>(c1) / draws;
        row.part1_exact = std::pow(1.0 - 1.0 / p.M, static_cast<double>(N));
        row.part2_emp = static_cast<double>(c2) / draws;
        row.part2_exact =
            std::exp(-(p.n / p.M) * (1.0 - static_cast<double>(I) * ball_vol));
        row.part3_emp = static_cast<double>(c3) / draws;
        row.part3_exact = std::exp(
            static_cast<double>(I) *
            (p.k * std::log(V / p.M) - std::lgamma(p.k + 1.0) - V / p.M));
        rows[c] = row;
    }
    return rows;
}

double chi_square_p_value(double statistic, long dof) {
    if (dof <= 0) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareReport coupling_distribution_test(CouplingBuilder builder,
                                           const RegimeParams& p,
                                           int cells_per_axis, long replicates,
                                           const StreamKey& key, int threads) {
    long cells = 1;
    for (int a = 0; a < p.d; ++a) cells *= cells_per_axis;
    const double expected = p.n / static_cast<double>(cells);
    if (expected < 5.0)
        throw std::invalid_argument(
            "coupling_distribution_test: expected cell count below 5");

    GridSpec count_grid{p.d, cells_per_axis};
    const StreamKey base = key.with_lane("coupling");

    // per-replicate histograms of cell counts, merged afterwards
    const int max_count = static_cast<int>(expected + 12.0 * std::sqrt(expected)) + 2;
    std::vector<std::vector<long>> hists(replicates);
    parallel_for(replicates, threads, [&](long t) {
        const StreamKey rk = base.with_replicate(t);
        PointSet ps;
        switch (builder) {
            case CouplingBuilder::IdentityPoisson:
                ps = sample_poisson(p.n, p.d, rk.with_lane("id"));
                break;
            case CouplingBuilder::Critical:
                ps = sample_critical_coupling(p.n, p.d, p.M, rk.with_lane("crit")).unioned;
                break;
            case CouplingBuilder::SparseResample:
            case CouplingBuilder::DenseResample: {
                const GridSpec grid = builder == CouplingBuilder::SparseResample
                                          ? sparse_grid(p)
                                          : dense_grid(p);
                const PointSet P = sample_poisson(p.n, p.d, rk.with_lane("P"));
                const PointSet Pp = sample_poisson(p.n, p.d, rk.with_lane("Pprime"));
                CounterRng coin(rk.with_lane("bernoulli"));
                std::vector<bool> replace(grid.box_count());
                for (long b = 0; b < grid.box_count(); ++b)
                    replace[b] = coin.next_unit() < p.epsilon;
                ps = resample_boxes(P, Pp, replace, grid);
                break;
            }
        }
        std::vector<long> counts(cells, 0);
        for (std::size_t i = 0; i < ps.size(); ++i)
            counts[count_grid.box_of(ps.point(i))]++;
        std::vector<long> hist(max_count + 1, 0);
        for (long c : counts) hist[std::min<long>(c, max_count)]++;
        hists[t] = std::move(hist);
    });

    std::vector<double> observed(max_count + 1, 0.0);
    for (const auto& h : hists)
        for (int v = 0; v <= max_count; ++v) observed[v] += h[v];

    const double total = static_cast<double>(replicates) * cells;
    std::vector<double> expected_bin(max_count + 1, 0.0);
    double pmf = std::exp(-expected);
    double cum = 0.0;
    for (int v = 0; v < max_count; ++v) {
        expected_bin[v] = total * pmf;
        cum += pmf;
        pmf *= expected / (v + 1);
    }
    expected_bin[max_count] = total * std::max(0.0, 1.0 - cum);

    // merge bins from both ends until every expected count is >= 5
    ChiSquareReport rep;
    rep.observations = static_cast<long>(total);
    rep.expected_per_cell = expected;
    double stat = 0.0;
    long bins = 0;
    double obs_acc = 0.0, exp_acc = 0.0;
    for (int v = 0; v <= max_count; ++v) {
        obs_acc += observed[v];
        exp_acc += expected_bin[v];
        const bool last = v == max_count;
        if (exp_acc >= 5.0 && (!last)) {
            // close the bin only if the remaining tail also keeps >= 5
            double tail = 0.0;
            for (int w = v + 1; w <= max_count; ++w) tail += expected_bin[w];
            if (tail < 5.0) continue;
            stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
            ++bins;
            obs_acc = 0.0;
            exp_acc = 0.0;
        } else if (last && exp_acc > 0.0) {
            stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
            ++bins;
        }
    }
    rep.statistic = stat;
    rep.bins = bins;
    rep.dof = std::max<long>(1, bins - 1);
    rep.p_value = chi_square_p_value(stat, rep.dof);
    return rep;
}

}  // namespace geomld
