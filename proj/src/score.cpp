#include "geomld/score.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace geomld {

double Cloud::dist(std::size_t i, std::size_t j) const {
    if (dist_matrix) return (*dist_matrix)[i * size() + j];
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double c = coords[i * dim + a] - coords[j * dim + a];
        s += c * c;
    }
    return std::sqrt(s);
}

double Cloud::diam() const {
    const std::size_t m = size();
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) best = std::max(best, dist(i, j));
    return best;
}

Cloud Cloud::shifted(std::span<const double> y) const {
    Cloud c = *this;
    for (std::size_t i = 0; i < size(); ++i)
        for (int a = 0; a < dim; ++a) c.coords[i * dim + a] += y[a];
    return c;
}

namespace {

double binom(std::size_t m, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > m) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * static_cast<double>(m - i) / (i + 1);
    return r;
}

// all pairwise distances within the index subset <= 1
bool is_clique(const Cloud& c, const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            if (c.dist(idx[i], idx[j]) > 1.0) return false;
    return true;
}

double count_cliques(const Cloud& c, int k0) {
    const std::size_t m = c.size();
    if (m < static_cast<std::size_t>(k0)) return 0.0;
    if (k0 == 1) return static_cast<double>(m);
    std::vector<std::size_t> idx(k0);
    double count = 0.0;
    // lexicographic subset walk
    for (int i = 0; i < k0; ++i) idx[i] = i;
    for (;;) {
        if (is_clique(c, idx)) count += 1.0;
        int pos = k0 - 1;
        while (pos >= 0 && idx[pos] == m - (k0 - pos)) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < k0; ++i) idx[i] = idx[i - 1] + 1;
    }
    return count;
}

}  // namespace

ScoreSpec clique_count_score(int d, int k0) {
    if (k0 < 1) throw std::invalid_argument("clique_count_score: k0 must be >= 1");
    ScoreSpec s;
    s.k0 = k0;
    std::ostringstream name;
    name << "clique" << k0 << "_d" << d;
    s.name = name.str();
    s.evaluate = [k0](const Cloud& c) { return count_cliques(c, k0); };
    s.bound = [k0](std::size_t m) { return binom(m, k0); };
    return s;
}

ScoreSpec edge_length_score(int d) {
    ScoreSpec s;
    s.k0 = 2;
    std::ostringstream name;
    name << "edge_length_d" << d;
    s.name = name.str();
    s.evaluate = [](const Cloud& c) {
        const std::size_t m = c.size();
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double dd = c.dist(i, j);
                if (dd <= 1.0) total += dd;
            }
        return total;
    };
    s.bound = [](std::size_t m) { return binom(m, 2); };
    return s;
}

namespace {

Cloud random_cloud(CounterRng& rng, int d, std::size_t m, double spread) {
    Cloud c;
    c.dim = d;
    c.coords.resize(m * d);
    for (double& x : c.coords) x = rng.uniform(-spread, spread);
    return c;
}

}  // namespace

ScoreValidationReport validate_score(const ScoreSpec& score, int d, int trials,
                                     const StreamKey& key) {
    if (trials < 1) throw std::invalid_argument("validate_score: trials >= 1");
    ScoreValidationReport rep;
    std::ostringstream detail;
    const int k0 = score.k0;

    // INV: random shifts leave the value unchanged
    {
        CounterRng rng(key.with_lane("inv"));
        rep.inv_pass = true;
        for (int t = 0; t < trials; ++t) {
            const std::size_t m = k0 + (t % 3);
            Cloud c = random_cloud(rng, d, m, 1.0);
            std::vector<double> y(d);
            for (double& v : y) v = rng.uniform(-10.0, 10.0);
            const double v0 = score.evaluate(c);
            const double v1 = score.evaluate(c.shifted(y));
            if (std::fabs(v0 - v1) > 1e-9 * (1.0 + std::fabs(v0))) {
                rep.inv_pass = false;
                detail << "INV violated at trial " << t << "; ";
                break;
            }
        }
    }

    // LOC: size-k0 configurations with diameter > k0 score zero
    {
        CounterRng rng(key.with_lane("loc"));
        rep.loc_pass = true;
        for (int t = 0; t < trials; ++t) {
            Cloud c = random_cloud(rng, d, k0, 1.0);
            if (k0 >= 2) {
                // stretch to force diameter into (k0, 2 k0]
                const double dm = c.diam();
                const double target = k0 * (1.0 + rng.next_unit());
                if (dm <= 0.0) continue;
                const double f = target / dm;
                for (double& x : c.coords) x *= f;
                if (c.diam() <= static_cast<double>(k0)) continue;
                if (score.evaluate(c) != 0.0) {
                    rep.loc_pass = false;
                    detail << "LOC violated at trial " << t << "; ";
                    break;
                }
            }
        }
    }

    // BND: score of small configurations stays below the declared bound
    {
        CounterRng rng(key.with_lane("bnd"));
        rep.bnd_pass = true;
        for (int t = 0; t < trials && rep.bnd_pass; ++t) {
            for (std::size_t m = 1; m <= static_cast<std::size_t>(2 * k0 + 2); ++m) {
                Cloud c = random_cloud(rng, d, m, 0.5 + rng.next_unit());
                if (score.evaluate(c) > score.bound(m) + 1e-12) {
                    rep.bnd_pass = false;
                    detail << "BND violated at m=" << m << "; ";
                    break;
                }
            }
        }
    }

    // POS: MC estimate of the positivity integral over R^{(k0-1)d}. LOC
    // confines the support to the |x_i| <= k0 window.
    {
        CounterRng rng(key.with_lane("pos"));
        if (k0 == 1) {
            Cloud c;
            c.dim = d;
            c.coords.assign(d, 0.0);
            rep.pos_estimate = score.evaluate(c);
            rep.pos_se = 0.0;
            rep.pos_positive = rep.pos_estimate > 0.0;
        } else {
            const double w = static_cast<double>(k0);
            double vol = 1.0;
            for (int i = 0; i < (k0 - 1) * d; ++i) vol *= 2.0 * w;
            double sum = 0.0, sumsq = 0.0;
            Cloud c;
            c.dim = d;
            c.coords.assign(static_cast<std::size_t>(k0) * d, 0.0);
            for (int t = 0; t < trials; ++t) {
                for (int i = d; i < k0 * d; ++i) c.coords[i] = rng.uniform(-w, w);
                const double v = score.evaluate(c);
                sum += v;
                sumsq += v * v;
            }
            const double mean = sum / trials;
            const double var = std::max(0.0, sumsq / trials - mean * mean);
            rep.pos_estimate = vol * mean;
            rep.pos_se = vol * std::sqrt(var / trials);
            rep.pos_positive = rep.pos_estimate > 3.0 * rep.pos_se;
        }
    }

    rep.detail = detail.str();
    return rep;
}

}  // namespace geomld
