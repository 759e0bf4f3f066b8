#pragma once

#include <utility>

#include "geomld/functionals.hpp"
#include "geomld/rng.hpp"

namespace geomld {

// Monte Carlo estimate of mu_{d,k0} = v_{d,k0}/k0!, the clique-count sparse
// limit. Exact 1 for k0 = 1.
std::pair<double, double> mu_clique(int d, int k0, long samples,
                                    const StreamKey& key);

// Simplified clique rate: a log(a/mu) - a + mu for a < mu (limit mu at a=0),
// zero at and above mu.
double sparse_clique_rate(double a, double mu);

struct TiltSolution {
    double theta = 0.0;
    double constraint_value = 0.0;  // T(rho_theta)
    double rate = 0.0;
    bool converged = false;
};

// Dense rate: minimize the relative entropy against tau_k(dx) = e^{-x}/(k-1)! dx
// on [s0, inf) subject to int (x - s0) drho <= a. Solved inside the
// exponential-tilt family rho_theta = e^{-theta(x-s0)} tau by bisection on
// theta (|T - a| <= 1e-10, 200 iterations); theta = 0 with rate 0 when the
// constraint is inactive.
TiltSolution dense_rate(double a, int k, double s0);

// Independent oracle: discretize [s0, s0 + domain_cap], minimize the convex
// objective sum(rho log(rho/tau) - rho + tau) under sum((x - s0) rho) <= a by
// projected gradient descent with Armijo backtracking. Shares nothing with
// the tilt derivation. Throws on step-rule divergence.
double dense_rate_bruteforce(double a, int k, double s0, int grid_points,
                             double domain_cap);

enum class TVariant { Sparse, Dense, DenseTruncated };

// T-maps over a discrete measure: int x drho, int (x-s0) drho, or the
// M-truncated dense variant.
double T_map(const DiscreteMeasure& rho, TVariant variant, double s0 = 0.0,
             double M = 0.0);

// P(Poisson(a) <= k-1), the large k-NN ball probability.
double knn_tail_probability(double a, int k);

// Entropy objective of the tilt rho_theta in closed form (for cross-checks).
double tilt_entropy_objective(double theta, int k, double s0);
double tilt_constraint_value(double theta, int k, double s0);

}  // namespace geomld
