#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "geomld/components.hpp"
#include "geomld/functionals.hpp"
#include "geomld/rates.hpp"
#include "geomld/score.hpp"
#include "oracles.hpp"

using namespace geomld;

namespace {

PointSet make_points(int d, std::initializer_list<std::vector<double>> pts) {
    PointSet ps(d);
    for (const auto& p : pts) ps.append(p);
    return ps;
}

// component enumeration through the all-pairs oracle, score evaluated on the
// exact rescaled torus distance matrix
double sparse_H_oracle(const PointSet& phi, const RegimeParams& p,
                       const ScoreSpec& score) {
    const auto labels = oracle::component_labels(phi, p.r_n);
    double total = 0.0;
    std::vector<bool> done(phi.size(), false);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (done[i]) continue;
        std::vector<std::uint32_t> comp;
        for (std::size_t j = 0; j < phi.size(); ++j)
            if (labels[j] == labels[i]) {
                comp.push_back(static_cast<std::uint32_t>(j));
                done[j] = true;
            }
        Cloud c;
        c.dim = phi.dim;
        c.coords.assign(comp.size() * phi.dim, 0.0);
        auto& mat = c.dist_matrix.emplace(comp.size() * comp.size(), 0.0);
        for (std::size_t x = 0; x < comp.size(); ++x)
            for (std::size_t y = 0; y < comp.size(); ++y)
                mat[x * comp.size() + y] =
                    torus_distance(phi, comp[x], comp[y]) / p.r_n;
        total += score.evaluate(c);
    }
    return total / p.sparse_speed();
}

// exhaustive k0-subset oracle (N <= 30)
double sparse_H_tilde_oracle(const PointSet& phi, const RegimeParams& p,
                             const ScoreSpec& score) {
    const std::size_t n = phi.size();
    const int k0 = p.k0;
    if (n < static_cast<std::size_t>(k0)) return 0.0;
    std::vector<std::uint32_t> idx(k0);
    double total = 0.0;
    std::vector<int> pick(k0);
    for (int i = 0; i < k0; ++i) pick[i] = i;
    for (;;) {
        for (int i = 0; i < k0; ++i) idx[i] = static_cast<std::uint32_t>(pick[i]);
        double diam = 0.0;
        for (int i = 0; i < k0; ++i)
            for (int j = i + 1; j < k0; ++j)
                diam = std::max(diam, torus_distance(phi, idx[i], idx[j]));
        bool isolated = true;
        for (std::size_t z = 0; z < n && isolated; ++z) {
            if (std::find(idx.begin(), idx.end(), static_cast<std::uint32_t>(z)) !=
                idx.end())
                continue;
            for (int i = 0; i < k0; ++i)
                if (torus_distance(phi, idx[i], z) < p.r_n) {
                    isolated = false;
                    break;
                }
        }
        if (diam <= k0 * p.r_n && isolated) {
            Cloud c;
            c.dim = phi.dim;
            c.coords.assign(static_cast<std::size_t>(k0) * phi.dim, 0.0);
            auto& mat = c.dist_matrix.emplace(static_cast<std::size_t>(k0) * k0, 0.0);
            for (int x = 0; x < k0; ++x)
                for (int y = 0; y < k0; ++y)
                    mat[x * k0 + y] = torus_distance(phi, idx[x], idx[y]) / p.r_n;
            total += score.evaluate(c);
        }
        int pos = k0 - 1;
        while (pos >= 0 && pick[pos] == static_cast<int>(n) - (k0 - pos)) --pos;
        if (pos < 0) break;
        ++pick[pos];
        for (int i = pos + 1; i < k0; ++i) pick[i] = pick[i - 1] + 1;
    }
    return total / p.sparse_speed();
}

double critical_knn_oracle(const PointSet& phi, const RegimeParams& p) {
    const std::size_t n = phi.size();
    if (n <= static_cast<std::size_t>(p.k)) return kInf;
    const double scale = std::pow(p.n, 1.0 / p.d);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> d;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d.push_back(torus_distance(phi, i, j));
        std::sort(d.begin(), d.end());
        const double rk = d[p.k - 1];
        for (double dd : d)
            if (dd <= rk) total += std::pow(scale * dd, p.alpha);
    }
    return total / p.n;
}

double dense_H_oracle(const PointSet& phi, const RegimeParams& p) {
    const double kd = unit_ball_volume(p.d);
    double total = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double rk = oracle::knn_radius(phi, phi.point(i), p.k,
                                             static_cast<std::int64_t>(i));
        total += std::max(0.0, p.n * kd * std::pow(rk, p.d) - p.a_n - p.s0);
    }
    return total / p.dense_speed();
}

}  // namespace

TEST_CASE("sparse_H hand examples") {
    RegimeParams p;
    p.d = 1;
    p.n = 10.0;
    p.r_n = 0.01;
    p.k0 = 2;
    const ScoreSpec edges = clique_count_score(1, 2);

    CHECK(sparse_H(PointSet(1), p, edges) == 0.0);

    // one isolated pair at distance r_n/2: rho = n^2 r_n = 1
    const PointSet pair = make_points(1, {{0.3}, {0.3 + 0.005}});
    CHECK(sparse_H(pair, p, edges) == doctest::Approx(1.0));

    // adding a far singleton must not change the value (k0 >= 2)
    const PointSet with_far = make_points(1, {{0.3}, {0.3 + 0.005}, {0.8}});
    CHECK(sparse_H(with_far, p, edges) == doctest::Approx(1.0));
}

TEST_CASE("sparse_H equals the component oracle on random configurations") {
    CounterRng rng({31, "sparseH", 0});
    for (int t = 0; t < 12; ++t) {
        RegimeParams p;
        p.d = 1 + t % 2;
        p.n = 40.0;
        p.r_n = 0.06;
        p.k0 = 2 + t % 2;
        const ScoreSpec score = clique_count_score(p.d, p.k0);
        const PointSet phi = oracle::random_point_set(rng, p.d, 60);
        CHECK(sparse_H(phi, p, score) ==
              doctest::Approx(sparse_H_oracle(phi, p, score)).epsilon(1e-12));
    }
    RegimeParams p;
    p.d = 2;
    p.n = 40.0;
    p.r_n = 0.08;
    p.k0 = 2;
    const ScoreSpec score = edge_length_score(2);
    const PointSet phi = oracle::random_point_set(rng, 2, 80);
    CHECK(sparse_H(phi, p, score) ==
          doctest::Approx(sparse_H_oracle(phi, p, score)).epsilon(1e-12));
}

TEST_CASE("sparse_H_tilde definitions") {
    RegimeParams p;
    p.d = 1;
    p.n = 10.0;
    p.r_n = 0.01;
    p.k0 = 2;
    const ScoreSpec edges = clique_count_score(1, 2);

    // isolated concentrated pair: tilde coincides with sparse_H
    const PointSet pair = make_points(1, {{0.3}, {0.3 + 0.005}});
    CHECK(sparse_H_tilde(pair, p, edges) == doctest::Approx(sparse_H(pair, p, edges)));

    // triangle of three mutually close points: no pair is isolated
    const PointSet tri = make_points(1, {{0.3}, {0.3 + 0.004}, {0.3 + 0.008}});
    CHECK(sparse_H_tilde(tri, p, edges) == 0.0);
}

TEST_CASE("sparse_H_tilde equals the exhaustive subset oracle") {
    CounterRng rng({32, "tilde", 0});
    for (int t = 0; t < 10; ++t) {
        RegimeParams p;
        p.d = 1 + t % 2;
        p.n = 25.0;
        p.r_n = 0.07;
        p.k0 = 2 + t % 2;
        const ScoreSpec score = clique_count_score(p.d, p.k0);
        const PointSet phi = oracle::random_point_set(rng, p.d, 24);
        CHECK(sparse_H_tilde(phi, p, score) ==
              doctest::Approx(sparse_H_tilde_oracle(phi, p, score)).epsilon(1e-12));
    }
}

TEST_CASE("score validation") {
    const ScoreSpec clique = clique_count_score(2, 2);
    const auto rep = validate_score(clique, 2, 400, {33, "val", 0});
    CHECK(rep.inv_pass);
    CHECK(rep.loc_pass);
    CHECK(rep.bnd_pass);
    CHECK(rep.pos_positive);

    // POS integral for d=1, k0=2 cliques is the volume of [-1,1]
    const auto pos1 = validate_score(clique_count_score(1, 2), 1, 400000, {33, "val", 1});
    CHECK(std::fabs(pos1.pos_estimate - 2.0) < 3.0 * pos1.pos_se + 1e-9);

    // a deliberately shift-dependent score fails INV
    ScoreSpec broken = clique_count_score(2, 2);
    broken.evaluate = [](const Cloud& c) {
        double s = 0.0;
        for (double x : c.coords) s += std::fabs(x);
        return s;
    };
    CHECK_FALSE(validate_score(broken, 2, 200, {33, "val", 2}).inv_pass);
}

TEST_CASE("clique and edge score examples") {
    const ScoreSpec c2 = clique_count_score(2, 2);
    Cloud pair;
    pair.dim = 2;
    pair.coords = {0.0, 0.0, 0.5, 0.0};
    CHECK(c2.evaluate(pair) == 1.0);
    CHECK(edge_length_score(2).evaluate(pair) == doctest::Approx(0.5));

    const ScoreSpec c3 = clique_count_score(2, 3);
    auto triangle = [](double side) {
        Cloud c;
        c.dim = 2;
        const double h = side * std::sqrt(3.0) / 2.0;
        c.coords = {0.0, 0.0, side, 0.0, side / 2.0, h};
        return c;
    };
    CHECK(c3.evaluate(triangle(0.9)) == 1.0);
    CHECK(c3.evaluate(triangle(1.1)) == 0.0);
}

TEST_CASE("critical_knn_H examples and oracle") {
    RegimeParams p;
    p.d = 1;
    p.n = 1.0;
    p.k = 1;
    p.alpha = 1.0;
    const PointSet duo = make_points(1, {{0.0}, {0.4}});
    CHECK(critical_knn_H(duo, p) == doctest::Approx(0.8));

    // #phi = k gives the infinite sentinel
    p.k = 2;
    CHECK(critical_knn_H(duo, p) == kInf);

    CounterRng rng({34, "knnH", 0});
    for (int t = 0; t < 8; ++t) {
        RegimeParams q;
        q.d = 2;
        q.n = 60.0;
        q.k = 1 + t % 3;
        q.alpha = 0.5 + t % 2;
        const PointSet phi = oracle::random_point_set(rng, 2, 50);
        CHECK(critical_knn_H(phi, q) ==
              doctest::Approx(critical_knn_oracle(phi, q)).epsilon(1e-12));
    }
}

TEST_CASE("critical_cutoff_H behavior") {
    RegimeParams p;
    p.d = 2;
    p.n = 50.0;
    p.k = 2;
    p.alpha = 1.0;
    p.M = 2.0;
    p.M_prime = 1e9;
    CounterRng rng({35, "cut", 0});
    const PointSet phi = oracle::random_point_set(rng, 2, 40);

    RegimeParams bad = p;
    bad.M = 3.0;
    bad.M_prime = 2.0;
    CHECK_THROWS_AS(critical_cutoff_H(phi, bad, 1.0), std::invalid_argument);

    // huge truncation radius and cap: equals the uncut functional
    CHECK(critical_cutoff_H(phi, p, 1e18) ==
          doctest::Approx(critical_knn_H(phi, p)).epsilon(1e-12));

    // zero cap kills everything
    CHECK(critical_cutoff_H(phi, p, 0.0) == 0.0);

    // moderate cap: per-point oracle with min(score, g)
    const double g = 1.2;
    const double scale = std::pow(p.n, 1.0 / p.d);
    double want = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        std::vector<double> d;
        for (std::size_t j = 0; j < phi.size(); ++j)
            if (j != i) d.push_back(torus_distance(phi, i, j));
        std::sort(d.begin(), d.end());
        double s = 0.0;
        for (double dd : d)
            if (dd <= d[p.k - 1]) s += std::pow(scale * dd, p.alpha);
        want += std::min(s, g);
    }
    want /= p.n;
    CHECK(critical_cutoff_H(phi, p, g) == doctest::Approx(want).epsilon(1e-12));

    // cutoff never exceeds the uncut value, monotone in the cap
    CHECK(critical_cutoff_H(phi, p, 0.7) <= critical_cutoff_H(phi, p, 1.4) + 1e-15);
    CHECK(critical_cutoff_H(phi, p, 1.4) <= critical_knn_H(phi, p) + 1e-15);
}

TEST_CASE("contact_H closed form and monotonicity") {
    RegimeParams p;
    p.d = 1;
    p.n = 1.0;
    p.alpha = 2.0;
    const PointSet one = make_points(1, {{0.5}});
    const auto v = contact_H(one, p, 2000);
    CHECK(std::fabs(v.value - 1.0 / 12.0) < 1e-4);

    // empty configuration: infinite sentinel
    CHECK(contact_H(PointSet(1), p, 16).value == kInf);

    // adding a point never increases the value
    const PointSet two = make_points(1, {{0.5}, {0.1}});
    CHECK(contact_H(two, p, 500).value <= contact_H(one, p, 500).value + 1e-15);

    // self-convergence on a 50-point configuration
    CounterRng rng({36, "contact", 0});
    RegimeParams q;
    q.d = 2;
    q.n = 50.0;
    q.alpha = 2.0;
    const PointSet fifty = oracle::random_point_set(rng, 2, 50);
    const auto fine = contact_H(fifty, q, 256);
    const auto finer = contact_H(fifty, q, 512);
    CHECK(std::fabs(fine.value - finer.value) < 1e-3);
    CHECK(finer.refinement_delta < 1e-3);
}

TEST_CASE("dense_H hand example and oracle") {
    RegimeParams p;
    p.d = 1;
    p.n = 10.0;
    p.k = 1;
    p.a_n = 1.0;
    p.s0 = 0.0;
    const PointSet duo = make_points(1, {{0.0}, {0.3}});
    CHECK(dense_H(duo, p) == doctest::Approx(std::exp(1.0)));

    // all gaps below threshold: zero
    const PointSet tight = make_points(1, {{0.50}, {0.52}, {0.54}});
    CHECK(dense_H(tight, p) == 0.0);

    CounterRng rng({37, "dense", 0});
    for (int t = 0; t < 8; ++t) {
        RegimeParams q;
        q.d = 1 + t % 2;
        q.n = 120.0;
        q.k = 1 + t % 2;
        q.a_n = 2.0;
        q.s0 = t % 2 ? 0.5 : 0.0;
        const PointSet phi = oracle::random_point_set(rng, q.d, 70);
        CHECK(dense_H(phi, q) ==
              doctest::Approx(dense_H_oracle(phi, q)).epsilon(1e-12));
    }
}

// Adding a point can only shrink the radii of the existing points, so their
// score sum is antitone. The whole functional is not: the inserted point
// contributes its own nonnegative score, and an isolated insertion can raise
// the total.
TEST_CASE("dense scores of existing points are antitone under adding points") {
    CounterRng rng({38, "antitone", 0});
    RegimeParams p;
    p.d = 2;
    p.n = 80.0;
    p.k = 1;
    p.a_n = 1.5;
    PointSet phi = oracle::random_point_set(rng, 2, 40);
    const std::size_t original = phi.size();
    const double kd = unit_ball_volume(p.d);
    auto partial_sum = [&](const PointSet& cfg) {
        double s = 0.0;
        for (std::size_t i = 0; i < original; ++i) {
            const double rk =
                oracle::knn_radius(cfg, cfg.point(i), p.k, static_cast<std::int64_t>(i));
            s += std::max(0.0, p.n * kd * std::pow(rk, p.d) - p.a_n - p.s0);
        }
        return s / p.dense_speed();
    };
    for (int t = 0; t < 10; ++t) {
        const double before = partial_sum(phi);
        std::vector<double> extra{rng.next_unit(), rng.next_unit()};
        phi.append(extra);
        CHECK(partial_sum(phi) <= before + 1e-15);
    }
}

TEST_CASE("dense empirical measure and the T identity") {
    RegimeParams p;
    p.d = 1;
    p.n = 60.0;
    p.k = 2;
    p.a_n = 1.0;
    p.s0 = -0.5;
    CHECK(dense_empirical_measure(PointSet(1), p).atoms.empty());

    CounterRng rng({39, "measure", 0});
    const PointSet phi = oracle::random_point_set(rng, 1, 50);
    const auto mu = dense_empirical_measure(phi, p);
    // T_k^de applied to the measure reproduces dense_H exactly
    CHECK(T_map(mu, TVariant::Dense, p.s0) ==
          doctest::Approx(dense_H(phi, p)).epsilon(1e-12));

    // atom locations match the per-point knn oracle
    const double kd = unit_ball_volume(1);
    std::vector<double> want;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double rk = oracle::knn_radius(phi, phi.point(i), p.k,
                                             static_cast<std::int64_t>(i));
        const double loc = p.n * kd * rk - p.a_n;
        if (loc >= p.s0) want.push_back(loc);
    }
    std::sort(want.begin(), want.end());
    std::vector<double> got;
    for (const auto& [x, m] : mu.atoms) got.push_back(x);
    std::sort(got.begin(), got.end());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}
