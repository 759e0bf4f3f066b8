#pragma once

#include <string>
#include <vector>

#include "geomld/functionals.hpp"
#include "geomld/rng.hpp"

namespace geomld {

struct EstimationResult {
    double p_hat = 0.0;
    double std_err = 0.0;
    long replicates = 0;
    double speed = 0.0;
    double normalized_log = 0.0;  // -log(p_hat)/speed; +inf when p_hat = 0
};

// One verified inequality. `side` says which direction the bound works;
// slack_ses is the tolerance in standard-error units used for `pass`, and
// excess_ses the measured signed exceedance.
struct BoundCheck {
    std::string name;
    double empirical = 0.0;
    double bound = 0.0;
    double se = 0.0;
    double slack_ses = 3.0;
    double excess_ses = 0.0;
    bool upper = true;  // empirical <= bound (+slack); false: empirical >= bound (-slack)
    bool pass = false;
    bool warn = false;  // statistical exceedance between 3 and 4 SE
    bool hard = false;  // deterministic claim: any exceedance fails
};

BoundCheck make_upper_check(std::string name, double empirical, double bound,
                            double se, double slack = 3.0);
BoundCheck make_lower_check(std::string name, double empirical, double bound,
                            double se, double slack = 3.0);
BoundCheck make_hard_check(std::string name, double empirical, double bound);

std::string bound_checks_to_csv(const std::vector<BoundCheck>& checks);

// Tail functionals addressable by the estimator.
enum class TailFunctional {
    SparseClique,   // sparse_H with the k0-clique score
    DenseKnn,       // dense_H
    ConstantZero,   // H = 0, a test hook
};

double evaluate_tail_functional(TailFunctional f, const PointSet& phi,
                                const RegimeParams& p);
double tail_speed(TailFunctional f, const RegimeParams& p);

// Monte Carlo frequency of {H <= a} over i.i.d. Poisson replicates. Keys are
// derived per replicate, reduction order fixed, output independent of the
// thread count.
EstimationResult estimate_lower_tail(TailFunctional f, const RegimeParams& p,
                                     double a, long replicates,
                                     const StreamKey& key, int threads = 1);

struct CurveRow {
    double speed = 0.0;
    EstimationResult result;
    bool degenerate = false;  // p_hat = 0 at this speed
};

std::vector<CurveRow> scaling_curve(TailFunctional f,
                                    const std::vector<RegimeParams>& params_list,
                                    double a, long replicates,
                                    const StreamKey& key, int threads = 1);

// E[#{X in Q cap P_m : P_m(B_r(X)) >= l}] <= m^l kappa_d^{l-1} r^{(l-1)d} |Q|.
BoundCheck verify_ball_count_bound(int d, double m, int l, double r,
                                   double box_volume, long replicates,
                                   const StreamKey& key, int threads = 1);

enum class BadBoxRegime { Sparse, Dense };

// Per-box bad/violation frequency against the closed-form bound of the
// respective regime.
BoundCheck verify_bad_box_probabilities(BadBoxRegime regime, const RegimeParams& p,
                                        long replicates, const StreamKey& key,
                                        int threads = 1);

struct SprinkleBoundRow {
    long N_n = 0;
    long I = 0;
    double bound = 0.0;
    double p_hat = 0.0;
    double se = 0.0;  // binomial SE at the bound value
    bool pass = false;
    double part1_emp = 0.0, part1_exact = 0.0;
    double part2_emp = 0.0, part2_exact = 0.0;
    double part3_emp = 0.0, part3_exact = 0.0;
};

// For each of `configs` conditioning realizations of P_n, re-draws the
// coupling `draws` times and compares the empirical conditional probability
// of the three-part sprinkling event against the closed-form lower bound.
std::vector<SprinkleBoundRow> verify_sprinkle_bound(const RegimeParams& p,
                                                    int configs, long draws,
                                                    const StreamKey& key,
                                                    int threads = 1);

enum class CouplingBuilder {
    IdentityPoisson,
    Critical,          // thin + sprinkle union, scale M
    SparseResample,    // epsilon-Bernoulli box resample on the sparse grid
    DenseResample,     // epsilon-Bernoulli box resample on the dense grid
};

struct ChiSquareReport {
    double statistic = 0.0;
    long dof = 0;
    double p_value = 0.0;
    long observations = 0;
    long bins = 0;
    double expected_per_cell = 0.0;
};

// Pooled chi-square of cell counts against Poisson(n / cells_per_axis^d).
// Throws when the expected cell count is below 5.
ChiSquareReport coupling_distribution_test(CouplingBuilder builder,
                                           const RegimeParams& p,
                                           int cells_per_axis, long replicates,
                                           const StreamKey& key, int threads = 1);

double chi_square_p_value(double statistic, long dof);

}  // namespace geomld
