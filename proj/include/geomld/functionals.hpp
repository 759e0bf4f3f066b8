#pragma once

#include <utility>
#include <vector>

#include "geomld/score.hpp"
#include "geomld/torus.hpp"

namespace geomld {

// Parameter bundle shared by all regimes. Fields irrelevant to an operation
// are ignored by it; validation happens at the call sites that need them.
struct RegimeParams {
    int d = 1;             // dimension
    double n = 1.0;        // intensity
    double r_n = 0.0;      // sparse connectivity radius
    int k0 = 1;            // sparse minimal positive-score size
    int k = 1;             // neighbor order (critical/dense)
    double alpha = 1.0;    // power weight
    double a_n = 0.0;      // dense centering
    double s0 = 0.0;       // dense shift
    double M = 0.0;        // sprinkling scale
    double M_prime = 0.0;  // cut-off truncation radius, > M
    double M0 = 0.0;       // dense secondary boundedness scale
    double epsilon = 0.0;  // resampling Bernoulli parameter
    double w_n = 0.0;      // dense shell width driver; 0 = default a_n/log(a_n)

    double sparse_speed() const;   // rho^sp = n^k0 r_n^{d(k0-1)}
    double dense_speed() const;    // rho^de = n a_n^{k-1} e^{-a_n}
    double effective_w_n() const;  // w_n or its default
};

double unit_ball_volume(int d);  // kappa_d

// Weighted atoms on the half-line; the evaluation domain of the T-maps and
// of the dense empirical measure.
struct DiscreteMeasure {
    std::vector<std::pair<double, double>> atoms;  // (location, mass >= 0)
    double total_mass() const;
};

// ---- sparse regime ----

// (1/rho) sum over connected components C of the r_n geometric graph of
// score(C / r_n), components evaluated with exact rescaled torus distances.
double sparse_H(const PointSet& phi, const RegimeParams& p, const ScoreSpec& score);

// Restriction to isolated, locally concentrated k0-subsets: the indicator
// requires every cross distance >= r_n and diameter <= k0 r_n.
double sparse_H_tilde(const PointSet& phi, const RegimeParams& p,
                      const ScoreSpec& score);

// ---- critical regime ----

// Representation A for the k-nearest-neighbor power-weighted edge lengths:
// (1/n) sum over points of sum over the k nearest of (n^{1/d} dist)^alpha.
// +inf when the configuration has at most k points.
double critical_knn_H(const PointSet& phi, const RegimeParams& p);

// Cut-off variant: neighborhoods truncated at rescaled radius M', each
// per-point score capped at g_of_M. Requires p.M_prime > p.M.
double critical_cutoff_H(const PointSet& phi, const RegimeParams& p, double g_of_M);

double knn_cutoff_cap(const RegimeParams& p);      // g(M) = e^M
double contact_cutoff_cap(const RegimeParams& p);  // g(M) = M^alpha

// Representation B for power-weighted spherical contact distances,
// approximated by a midpoint rule on resolution^d cells.
struct ContactValue {
    double value = 0.0;
    double refinement_delta = 0.0;  // |value - coarser half-resolution value|
};
ContactValue contact_H(const PointSet& phi, const RegimeParams& p, int resolution);

// ---- dense regime ----

// (1/rho^de) sum over points of (n kappa_d R_k^d - a_n - s0)_+.
double dense_H(const PointSet& phi, const RegimeParams& p);

// Empirical measure of centered k-NN ball volumes restricted to [s0, inf);
// one atom of mass 1/rho^de per surviving point.
DiscreteMeasure dense_empirical_measure(const PointSet& phi, const RegimeParams& p);

}  // namespace geomld
