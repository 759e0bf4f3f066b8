#include <doctest.h>

#include <cmath>
#include <sstream>

#include "geomld/components.hpp"
#include "geomld/spatial_index.hpp"
#include "geomld/torus.hpp"
#include "oracles.hpp"

using namespace geomld;

namespace {

PointSet make_points(int d, std::initializer_list<std::vector<double>> pts) {
    PointSet ps(d);
    for (const auto& p : pts) ps.append(p);
    return ps;
}

}  // namespace

TEST_CASE("torus distance basics") {
    const double x1[] = {0.9};
    const double y1[] = {0.1};
    CHECK(torus_distance(std::span(x1), std::span(y1)) == doctest::Approx(0.2));
    CHECK(torus_distance(std::span(x1), std::span(x1)) == 0.0);

    const double x2[] = {0.95, 0.5};
    const double y2[] = {0.05, 0.5};
    CHECK(torus_distance(std::span(x2), std::span(y2)) == doctest::Approx(0.1));

    const double z2[] = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(torus_distance(std::span(x2), std::span(z2)),
                    std::invalid_argument);
}

TEST_CASE("metric axioms on random triples") {
    CounterRng rng({11, "triples", 0});
    for (int d : {1, 2, 3}) {
        for (int t = 0; t < 3400; ++t) {
            std::vector<double> x(d), y(d), z(d);
            for (int a = 0; a < d; ++a) {
                x[a] = rng.next_unit();
                y[a] = rng.next_unit();
                z[a] = rng.next_unit();
            }
            const double dxy = torus_distance(std::span(x), std::span(y));
            const double dyx = torus_distance(std::span(y), std::span(x));
            const double dyz = torus_distance(std::span(y), std::span(z));
            const double dxz = torus_distance(std::span(x), std::span(z));
            CHECK(dxy == dyx);
            CHECK(dxz <= dxy + dyz + 1e-12);
            CHECK(dxy <= std::sqrt(static_cast<double>(d)) / 2.0 + 1e-15);

            // torus distance never exceeds the Euclidean distance of the
            // canonical representatives
            double eu = 0.0;
            for (int a = 0; a < d; ++a) eu += (x[a] - y[a]) * (x[a] - y[a]);
            CHECK(dxy <= std::sqrt(eu) + 1e-15);
        }
    }
}

TEST_CASE("coordinates canonicalized into [0,1)") {
    PointSet ps(2);
    const double raw[] = {1.25, -0.25};
    ps.append(raw);
    CHECK(ps.point(0)[0] == doctest::Approx(0.25));
    CHECK(ps.point(0)[1] == doctest::Approx(0.75));
}

TEST_CASE("points_in_ball matches brute force and is monotone in r") {
    CounterRng rng({12, "ball", 0});
    for (int d : {1, 2, 3}) {
        const PointSet ps = oracle::random_point_set(rng, d, 200);
        SpatialIndex idx(ps);
        std::vector<double> c(d);
        for (int t = 0; t < 25; ++t) {
            for (int a = 0; a < d; ++a) c[a] = rng.next_unit();
            const double r = 0.1 * rng.next_unit() + 0.02;
            CHECK(idx.points_in_ball(c, r) == oracle::ball(ps, c, r));

            const auto small = idx.points_in_ball(c, r);
            const auto big = idx.points_in_ball(c, 1.7 * r);
            CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
        }
        // r = 0 with no coincident point: empty
        for (int a = 0; a < d; ++a) c[a] = 0.123456;
        CHECK(idx.points_in_ball(c, 0.0).empty());
        // metric diameter captures everything
        CHECK(idx.points_in_ball(c, std::sqrt(static_cast<double>(d)) / 2.0).size() ==
              ps.size());
    }
}

TEST_CASE("knn_radius basics and oracle equivalence") {
    const PointSet pair = make_points(1, {{0.2}, {0.5}});
    CHECK(knn_radius(pair.point(0), pair, 1) == doctest::Approx(0.3));

    const PointSet lonely = make_points(1, {{0.2}});
    CHECK(knn_radius(lonely.point(0), lonely, 1) == kInf);

    CounterRng rng({13, "knn", 0});
    for (int d : {1, 2}) {
        const PointSet ps = oracle::random_point_set(rng, d, 100);
        SpatialIndex idx(ps);
        for (std::size_t i = 0; i < 20; ++i) {
            const double got = idx.knn_radius(ps.point(i), 3, static_cast<std::int64_t>(i));
            const double want = oracle::knn_radius(ps, ps.point(i), 3, i);
            CHECK(got == doctest::Approx(want).epsilon(1e-13));
        }
    }
}

TEST_CASE("knn_radius and contact_distance are antitone in the configuration") {
    CounterRng rng({14, "antitone", 0});
    for (int t = 0; t < 40; ++t) {
        PointSet ps = oracle::random_point_set(rng, 2, 30);
        std::vector<double> probe{rng.next_unit(), rng.next_unit()};
        const double before = knn_radius(probe, ps, 2);
        const double cbefore = contact_distance(probe, ps);
        std::vector<double> extra{rng.next_unit(), rng.next_unit()};
        ps.append(extra);
        CHECK(knn_radius(probe, ps, 2) <= before);
        CHECK(contact_distance(probe, ps) <= cbefore);
    }
}

TEST_CASE("contact_distance basics") {
    const PointSet single = make_points(2, {{0.3, 0.3}});
    CHECK(contact_distance(single.point(0), single) == 0.0);
    const PointSet empty(2);
    const double probe[] = {0.1, 0.1};
    CHECK(contact_distance(std::span(probe), empty) == kInf);

    CounterRng rng({15, "contact", 0});
    const PointSet ps = oracle::random_point_set(rng, 3, 150);
    SpatialIndex idx(ps);
    std::vector<double> c(3);
    for (int t = 0; t < 20; ++t) {
        for (auto& v : c) v = rng.next_unit();
        CHECK(idx.contact_distance(c) == doctest::Approx(oracle::contact(ps, c)));
    }
}

TEST_CASE("connected_components basics") {
    const PointSet two = make_points(1, {{0.1}, {0.4}});
    CHECK(connected_components(two, 0.1).size() == 2);

    // chain of 5 points spaced r/2 apart
    const double r = 0.05;
    PointSet chain(1);
    for (int i = 0; i < 5; ++i) {
        const double x[] = {0.1 + i * r / 2.0};
        chain.append(x);
    }
    CHECK(connected_components(chain, r).size() == 1);
}

TEST_CASE("connected_components equals union-find oracle on random sets") {
    CounterRng rng({16, "cc", 0});
    for (int d : {1, 2, 3}) {
        const PointSet ps = oracle::random_point_set(rng, d, 300);
        const double r = 0.05;
        const auto groups = connected_components(ps, r);
        const auto labels = oracle::component_labels(ps, r);
        std::size_t total = 0;
        for (const auto& g : groups) {
            total += g.size();
            for (std::size_t t = 1; t < g.size(); ++t)
                CHECK(labels[g[t]] == labels[g[0]]);
        }
        CHECK(total == ps.size());
        std::vector<std::uint32_t> uniq(labels);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        CHECK(groups.size() == uniq.size());
    }
}

TEST_CASE("components coarsen monotonically in r") {
    CounterRng rng({17, "coarsen", 0});
    const PointSet ps = oracle::random_point_set(rng, 2, 120);
    const auto fine = connected_components(ps, 0.04);
    const auto coarse = connected_components(ps, 0.08);
    std::vector<std::size_t> coarse_of(ps.size());
    for (std::size_t g = 0; g < coarse.size(); ++g)
        for (auto i : coarse[g]) coarse_of[i] = g;
    for (const auto& comp : fine)
        for (std::size_t t = 1; t < comp.size(); ++t)
            CHECK(coarse_of[comp[t]] == coarse_of[comp[0]]);
}

TEST_CASE("diameter") {
    const PointSet two = make_points(1, {{0.1}, {0.3}});
    CHECK(diameter(two) == doctest::Approx(0.2));
    CHECK_THROWS_AS(diameter(make_points(1, {{0.5}})), std::invalid_argument);

    // equilateral triple in d=2
    const double s = 0.2;
    const double h = s * std::sqrt(3.0) / 2.0;
    const PointSet tri = make_points(2, {{0.3, 0.3}, {0.3 + s, 0.3}, {0.3 + s / 2, 0.3 + h}});
    CHECK(diameter(tri) == doctest::Approx(s));

    CounterRng rng({18, "diam", 0});
    const PointSet ps = oracle::random_point_set(rng, 2, 40);
    double want = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            want = std::max(want, torus_distance(ps, i, j));
    CHECK(diameter(ps) == doctest::Approx(want));
}

TEST_CASE("csv round trip preserves points") {
    CounterRng rng({19, "csv", 0});
    const PointSet ps = oracle::random_point_set(rng, 3, 25);
    const std::string text = point_set_to_csv(ps);
    CHECK(text.rfind("dim=3", 0) == 0);
    const PointSet back = point_set_from_csv(text);
    REQUIRE(back.size() == ps.size());
    REQUIRE(back.dim == ps.dim);
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (int a = 0; a < 3; ++a)
            CHECK(back.point(i)[a] == ps.point(i)[a]);  // 17 digits: exact
}
