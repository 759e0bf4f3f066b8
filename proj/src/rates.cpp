#include "geomld/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace geomld {

std::pair<double, double> mu_clique(int d, int k0, long samples,
                                    const StreamKey& key) {
    if (k0 < 1) throw std::invalid_argument("mu_clique: k0 must be >= 1");
    if (k0 == 1) return {1.0, 0.0};
    if (samples < 1) throw std::invalid_argument("mu_clique: samples must be >= 1");
    // Integrand support sits inside [-1,1]^{d(k0-1)}: every point must be
    // within distance 1 of the origin.
    CounterRng rng(key.with_lane("mu_clique"));
    const int vars = d * (k0 - 1);
    double vol = 1.0;
    for (int i = 0; i < vars; ++i) vol *= 2.0;
    std::vector<double> x(static_cast<std::size_t>(k0) * d, 0.0);
    double hits = 0.0;
    for (long s = 0; s < samples; ++s) {
        for (int i = d; i < k0 * d; ++i) x[i] = rng.uniform(-1.0, 1.0);
        bool ok = true;
        for (int i = 0; i < k0 && ok; ++i)
            for (int j = i + 1; j < k0; ++j) {
                double sq = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double c = x[i * d + a] - x[j * d + a];
                    sq += c * c;
                }
                if (sq > 1.0) {
                    ok = false;
                    break;
                }
            }
        if (ok) hits += 1.0;
    }
    const double fact = std::tgamma(k0 + 1.0);
    const double p = hits / samples;
    const double est = vol * p / fact;
    const double se = vol * std::sqrt(p * (1.0 - p) / samples) / fact;
    return {est, se};
}

double sparse_clique_rate(double a, double mu) {
    if (mu <= 0.0) throw std::invalid_argument("sparse_clique_rate: mu must be > 0");
    if (a < 0.0) throw std::invalid_argument("sparse_clique_rate: a must be >= 0");
    if (a >= mu) return 0.0;
    if (a == 0.0) return mu;  // a log a -> 0
    return a * std::log(a / mu) - a + mu;
}

namespace {

// total mass constant C = e^{-s0}/(k-1)!; under the tilt,
// T(theta) = C/(1+theta)^2 and mass(theta) = C/(1+theta).
double tilt_mass_constant(int k, double s0) {
    return std::exp(-s0) / std::tgamma(static_cast<double>(k));
}

}  // namespace

double tilt_constraint_value(double theta, int k, double s0) {
    const double C = tilt_mass_constant(k, s0);
    return C / ((1.0 + theta) * (1.0 + theta));
}

double tilt_entropy_objective(double theta, int k, double s0) {
    const double C = tilt_mass_constant(k, s0);
    const double f = theta / (1.0 + theta);
    return C * f * f;
}

TiltSolution dense_rate(double a, int k, double s0) {
    if (a <= 0.0) throw std::invalid_argument("dense_rate: a must be > 0");
    if (k < 1) throw std::invalid_argument("dense_rate: k must be >= 1");
    const double C = tilt_mass_constant(k, s0);
    TiltSolution sol;
    if (a >= C) {
        // tau itself is feasible
        sol.theta = 0.0;
        sol.constraint_value = C;
        sol.rate = 0.0;
        sol.converged = true;
        return sol;
    }
    double lo = 0.0;
    double hi = 2.0 * (std::sqrt(C / a) - 1.0) + 1.0;
    while (tilt_constraint_value(hi, k, s0) > a) hi *= 2.0;
    const double tol = 1e-10;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double t = tilt_constraint_value(mid, k, s0);
        if (std::fabs(t - a) <= tol) {
            sol.theta = mid;
            sol.constraint_value = t;
            sol.rate = tilt_entropy_objective(mid, k, s0);
            sol.converged = true;
            return sol;
        }
        if (t > a)
            lo = mid;
        else
            hi = mid;
    }
    sol.theta = 0.5 * (lo + hi);
    sol.constraint_value = tilt_constraint_value(sol.theta, k, s0);
    sol.rate = tilt_entropy_objective(sol.theta, k, s0);
    sol.converged = std::fabs(sol.constraint_value - a) <= tol;
    return sol;
}

namespace {

double bf_objective(const std::vector<double>& rho, const std::vector<double>& tau) {
    double f = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] > 0.0) f += rho[i] * std::log(rho[i] / tau[i]);
        f += tau[i] - rho[i];
    }
    return f;
}

// Projection onto {v >= 0, c.v <= a} in the metric sum (v-u)^2 / w_i, by
// bisection on the multiplier of the linear constraint.
void bf_project(std::vector<double>& u, const std::vector<double>& w,
                const std::vector<double>& c, double a) {
    for (double& v : u) v = std::max(0.0, v);
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += c[i] * u[i];
    if (dot <= a) return;
    auto constrained = [&](double mu) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            s += c[i] * std::max(0.0, u[i] - mu * w[i] * c[i]);
        return s;
    };
    double lo = 0.0, hi = 1.0;
    while (constrained(hi) > a) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (constrained(mid) > a)
            lo = mid;
        else
            hi = mid;
    }
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = std::max(0.0, u[i] - hi * w[i] * c[i]);
}

}  // namespace

double dense_rate_bruteforce(double a, int k, double s0, int grid_points,
                             double domain_cap) {
    if (grid_points < 10)
        throw std::invalid_argument("dense_rate_bruteforce: grid_points >= 10");
    if (a <= 0.0 || domain_cap <= 0.0)
        throw std::invalid_argument("dense_rate_bruteforce: a, domain_cap > 0");
    const int G = grid_points;
    const double h = domain_cap / G;
    const double fact = std::tgamma(static_cast<double>(k));
    std::vector<double> tau(G), c(G);
    for (int i = 0; i < G; ++i) {
        const double lo = s0 + i * h;
        tau[i] = (std::exp(-lo) - std::exp(-(lo + h))) / fact;  // exact cell mass
        c[i] = (i + 0.5) * h;                                   // x_i - s0
    }

    // feasible start: tau scaled onto the constraint when needed
    std::vector<double> rho = tau;
    {
        double T = 0.0;
        for (int i = 0; i < G; ++i) T += c[i] * rho[i];
        if (T > a)
            for (double& v : rho) v *= a / T;
    }

    // Projected gradient descent in the diagonal-Hessian metric: the Hessian
    // of the objective is diag(1/rho), so the scaled step is
    // rho - alpha * rho * log(rho/tau), projected onto the constraint set in
    // the same metric, with Armijo backtracking on alpha. The plain
    // Euclidean-metric iteration stalls on this problem because the
    // curvature spans a factor of about e^{theta * domain_cap} across cells.
    double f = bf_objective(rho, tau);
    std::vector<double> g(G), w(G), u(G), trial(G), dir(G);
    const int max_iters = 2000;
    for (int it = 0; it < max_iters; ++it) {
        for (int i = 0; i < G; ++i) {
            g[i] = std::log(std::max(rho[i] / tau[i], 1e-15));
            w[i] = std::max(rho[i], 1e-12 * tau[i]);  // inverse curvature
            u[i] = rho[i] - w[i] * g[i];
        }
        bf_project(u, w, c, a);
        double gdotd = 0.0, dnorm = 0.0;
        for (int i = 0; i < G; ++i) {
            dir[i] = u[i] - rho[i];
            gdotd += g[i] * dir[i];
            dnorm = std::max(dnorm, std::fabs(dir[i]));
        }
        if (dnorm < 1e-16) break;  // projected stationarity

        double alpha = 1.0, ft = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (int i = 0; i < G; ++i)
                trial[i] = std::max(0.0, rho[i] + alpha * dir[i]);
            ft = bf_objective(trial, tau);
            if (ft <= f + 1e-4 * alpha * gdotd) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        for (int i = 0; i < G; ++i)
            rho[i] = std::max(0.0, rho[i] + alpha * dir[i]);
        const double drop = f - ft;
        f = ft;
        if (!std::isfinite(f))
            throw std::runtime_error("dense_rate_bruteforce: step rule diverged");
        if (drop < 1e-14 && it > 3) break;
    }
    return f;
}

double T_map(const DiscreteMeasure& rho, TVariant variant, double s0, double M) {
    double total = 0.0;
    for (const auto& [x, m] : rho.atoms) {
        switch (variant) {
            case TVariant::Sparse:
                total += m * x;
                break;
            case TVariant::Dense:
                total += m * (x - s0);
                break;
            case TVariant::DenseTruncated:
                total += m * std::min(x - s0, M);
                break;
        }
    }
    return total;
}

double knn_tail_probability(double a, int k) {
    if (a <= 0.0) throw std::invalid_argument("knn_tail_probability: a must be > 0");
    if (k < 1) throw std::invalid_argument("knn_tail_probability: k must be >= 1");
    double term = std::exp(-a);
    double sum = term;
    for (int i = 1; i < k; ++i) {
        term *= a / i;
        sum += term;
    }
    return sum;
}

}  // namespace geomld
