#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "geomld/estimation.hpp"
#include "geomld/point_process.hpp"
#include "geomld/rng.hpp"

using namespace geomld;

TEST_CASE("counter rng reproducibility and lane separation") {
    CounterRng a({42, "lane", 7});
    CounterRng b({42, "lane", 7});
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CounterRng c({42, "lane", 8});
    CounterRng d({42, "other", 7});
    CounterRng e({43, "lane", 7});
    CounterRng f({42, "lane", 7});
    bool all_same = true;
    for (int i = 0; i < 16; ++i) {
        const auto x = f.next_u64();
        if (c.next_u64() != x || d.next_u64() != x || e.next_u64() != x)
            all_same = false;
    }
    CHECK_FALSE(all_same);
}

TEST_CASE("poisson sampler mean at both method branches") {
    // inversion branch (mean < 30) and rejection branch
    for (double mean : {3.0, 50.0}) {
        CounterRng rng({5, "poisson_mean", static_cast<std::int64_t>(mean)});
        const long R = 100000;
        double sum = 0.0;
        for (long i = 0; i < R; ++i) sum += poisson_count(rng, mean);
        const double avg = sum / R;
        CHECK(std::fabs(avg - mean) < 3.0 * std::sqrt(mean / R));
    }
}

TEST_CASE("sample_poisson basics") {
    CHECK(sample_poisson(0.0, 2, {1, "zero", 0}).empty());

    const PointSet a = sample_poisson(50.0, 2, {9, "det", 3});
    const PointSet b = sample_poisson(50.0, 2, {9, "det", 3});
    CHECK(a.coords == b.coords);

    // mean count over many replicates: n = 50 within 3 sqrt(n/R)
    const long R = 100000;
    double total = 0.0;
    for (long i = 0; i < R; ++i)
        total += sample_poisson(50.0, 1, StreamKey{10, "mean", i}).size();
    CHECK(std::fabs(total / R - 50.0) < 3.0 * std::sqrt(50.0 / R));
}

TEST_CASE("thin basics and binomial count") {
    const PointSet base = sample_poisson(100.0, 2, {11, "thinbase", 0});
    const PointSet all = thin(base, 1.0, {11, "thin", 0});
    CHECK(all.coords == base.coords);
    CHECK(thin(base, 0.0, {11, "thin", 1}).empty());
    CHECK_THROWS_AS(thin(base, 1.5, {11, "thin", 2}), std::invalid_argument);

    PointSet big(1);
    CounterRng fill({11, "fill", 0});
    for (int i = 0; i < 10000; ++i) {
        const double x[] = {fill.next_unit()};
        big.append(x);
    }
    const PointSet half = thin(big, 0.5, {11, "thin", 3});
    CHECK(std::fabs(static_cast<double>(half.size()) - 5000.0) < 3.0 * 50.0);
}

TEST_CASE("critical coupling structure") {
    CHECK_THROWS_AS(sample_critical_coupling(10.0, 1, 1.0, {12, "cc", 0}),
                    std::invalid_argument);

    const auto c = sample_critical_coupling(40.0, 2, 1e9, {12, "cc", 1});
    CHECK(c.thinned.coords == c.base.coords);  // survival ~ 1
    CHECK(c.sprinkle.empty());                 // intensity ~ 0

    const auto z = sample_critical_coupling(0.0, 2, 4.0, {12, "cc", 2});
    CHECK(z.base.empty());
    CHECK(z.unioned.empty());

    const auto u = sample_critical_coupling(30.0, 2, 3.0, {12, "cc", 3});
    CHECK(u.unioned.size() == u.thinned.size() + u.sprinkle.size());
    CHECK(u.thinned.size() <= u.base.size());
}

TEST_CASE("resample_boxes membership semantics") {
    const GridSpec grid{2, 4};
    const PointSet P = sample_poisson(80.0, 2, {13, "rbP", 0});
    const PointSet Pp = sample_poisson(80.0, 2, {13, "rbPp", 0});

    std::vector<bool> none(grid.box_count(), false);
    std::vector<bool> all(grid.box_count(), true);
    const PointSet same = resample_boxes(P, Pp, none, grid);
    const PointSet swapped = resample_boxes(P, Pp, all, grid);
    CHECK(same.size() == P.size());
    CHECK(swapped.size() == Pp.size());

    // half the boxes: each box's restriction comes from the flagged source
    std::vector<bool> half(grid.box_count(), false);
    for (long b = 0; b < grid.box_count(); b += 2) half[b] = true;
    const PointSet mix = resample_boxes(P, Pp, half, grid);
    const auto mix_boxes = points_by_box(mix, grid);
    const auto p_boxes = points_by_box(P, grid);
    const auto pp_boxes = points_by_box(Pp, grid);
    for (long b = 0; b < grid.box_count(); ++b) {
        const auto& src = half[b] ? pp_boxes[b] : p_boxes[b];
        const PointSet& sps = half[b] ? Pp : P;
        REQUIRE(mix_boxes[b].size() == src.size());
        for (std::size_t t = 0; t < src.size(); ++t) {
            auto want = sps.point(src[t]);
            auto got = mix.point(mix_boxes[b][t]);
            for (int axis = 0; axis < 2; ++axis) CHECK(got[axis] == want[axis]);
        }
    }
}

TEST_CASE("grid neighborhood on the torus") {
    const GridSpec g1{1, 10};
    const auto nb = g1.neighborhood(0);
    CHECK(nb == std::vector<long>{0, 1, 9});
    const GridSpec g2{2, 4};
    CHECK(g2.neighborhood(5).size() == 9);
    const GridSpec tiny{2, 2};
    CHECK(tiny.neighborhood(0).size() == 4);  // wrap collapses duplicates
}

TEST_CASE("superposition and coupling keep the Poisson law (chi-square)") {
    RegimeParams p;
    p.d = 2;
    p.n = 120.0;
    p.M = 4.0;
    auto rep = coupling_distribution_test(CouplingBuilder::IdentityPoisson, p, 3,
                                          3000, {14, "sup", 0}, 2);
    CHECK(rep.p_value > 0.001);
    rep = coupling_distribution_test(CouplingBuilder::Critical, p, 3, 3000,
                                     {14, "sup", 1}, 2);
    CHECK(rep.p_value > 0.001);
}

TEST_CASE("full replicate determinism across thread counts") {
    RegimeParams p;
    p.d = 1;
    p.n = 40.0;
    p.a_n = std::log(8.0);
    p.k = 1;
    const auto r1 = estimate_lower_tail(TailFunctional::DenseKnn, p, 0.8, 500,
                                        {15, "det", 0}, 1);
    const auto r2 = estimate_lower_tail(TailFunctional::DenseKnn, p, 0.8, 500,
                                        {15, "det", 0}, 2);
    CHECK(r1.p_hat == r2.p_hat);
    CHECK(r1.normalized_log == r2.normalized_log);
}
