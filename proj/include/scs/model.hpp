// Sparse Cox subgrouping: a latent-class proportional-hazards mixture whose
// gating network carries a group-lasso penalty. Subjects belong to one of
// K latent groups (reference group 0 plus a benefited group +1 and
// optionally a harmed group -1); within group k the hazard is
// lambda_0(t) * exp(beta'x + k*a*omega), and group membership follows a
// softmax gating P(Z=k|x) = exp(theta_k'x) / sum_j exp(theta_j'x) with
// theta row 0 pinned to zero for identifiability. Fitting alternates a
// posterior-weighting expectation step with partial-likelihood gradient
// ascent on (beta, omega), a weighted Breslow refresh of the baseline
// cumulative hazard, and a proximal gradient step on theta.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "scs/types.hpp"

namespace scs {

// Ordered latent group labels; the first entry is always the reference
// group 0 whose gating row is fixed at zero. {0} is a degenerate spec kept
// for tests.
struct LatentSpec {
    std::vector<int> groups{0, +1, -1};

    static LatentSpec two_group() { return LatentSpec{{0, +1}}; }
    static LatentSpec three_group() { return LatentSpec{{0, +1, -1}}; }

    std::size_t K() const { return groups.size(); }
    // Index of label k; throws ArgumentError when k is not in the spec.
    std::size_t index_of(int k) const;
    void validate() const;
    bool operator==(const LatentSpec& other) const { return groups == other.groups; }
};

// Full parameter set of the mixture.
struct ScsParams {
    Eigen::MatrixXd theta;  // K x d gating coefficients, row 0 identically zero
    Eigen::VectorXd beta;   // prognostic coefficients, length d
    double omega = 0.0;     // treatment log-effect
    StepFunction baseline_cumhaz;  // non-decreasing, starts at 0
    LatentSpec latent;
};

// Soft assignments, one row per subject on the simplex over groups.
struct PosteriorMatrix {
    Eigen::MatrixXd gamma;  // n x K
};

struct FitConfig {
    LatentSpec latent = LatentSpec::three_group();
    double epsilon = 0.0;     // group-lasso strength
    double eta = 0.01;        // base gradient step size
    int inner_steps = 5;      // maximization substeps per outer iteration
    int max_outer_iters = 500;
    double tol = 1e-6;        // relative change of the penalized objective
    std::uint64_t seed = 1;
    int restarts = 3;
    int threads = 1;
};

struct FitDiagnostics {
    std::vector<double> objective_trace;  // penalized, minimization sign
    int outer_iterations = 0;
    double final_objective = 0.0;
    std::vector<int> active_features;  // {d : ||theta_col_d|| > 0}
    int degenerate_rows = 0;           // posterior rows that fell back to uniform
    std::vector<double> restart_objectives;
    int chosen_restart = 0;
    bool canonicalized = false;  // groups relabeled so omega <= 0
};

struct FitResult {
    ScsParams params;
    FitDiagnostics diagnostics;
};

// exp(beta'x + k*a*omega).
double relative_hazard(const ScsParams& params, const Eigen::VectorXd& x, int a, int k);

// Softmax over theta*x; accepts any theta (the shift invariance that
// motivates pinning row 0 is itself under test).
Eigen::VectorXd gating_probs(const Eigen::MatrixXd& theta, const Eigen::VectorXd& x);

// Gating probabilities under fitted parameters; the phenotype score.
Eigen::VectorXd predict_gating(const ScsParams& params, const Eigen::VectorXd& x);

// Posterior responsibilities: gamma_ik is proportional to
// h_ik^delta_i * S0(u_i)^h_ik * exp(theta_k'x_i), row-normalized in log
// space. Rows whose weights all underflow are set uniform (counted via the
// optional out-parameter).
PosteriorMatrix e_step(const ScsParams& params, const Dataset& ds,
                       int* degenerate_rows = nullptr);

// Weighted Cox partial log-likelihood under posterior weights, Breslow tie
// handling, risk set {j : u_j >= t}.
double weighted_partial_loglik(const ScsParams& params, const PosteriorMatrix& gamma,
                               const Dataset& ds);

// Analytic gradient of the weighted partial log-likelihood with respect to
// (beta, omega).
std::pair<Eigen::VectorXd, double> pl_gradient(const ScsParams& params,
                                               const PosteriorMatrix& gamma, const Dataset& ds);

// Weighted Breslow estimate of the baseline cumulative hazard; jumps at
// event times, accumulated with u <= t.
StepFunction breslow_update(const ScsParams& params, const PosteriorMatrix& gamma,
                            const Dataset& ds);

// Penalized negative gating objective (to minimize): the posterior-weighted
// softmax cross-entropy plus epsilon * sum_d ||theta_col_d||_2.
double gating_objective(const Eigen::MatrixXd& theta, const PosteriorMatrix& gamma,
                        const Dataset& ds, double epsilon);

// Gradient of the unpenalized cross-entropy term; row 0 is zeroed since the
// reference row is not a free parameter.
Eigen::MatrixXd gating_gradient(const Eigen::MatrixXd& theta, const PosteriorMatrix& gamma,
                                const Dataset& ds);

// Column-wise group soft threshold across the non-reference rows: a column
// whose norm is below the threshold collapses to zero, otherwise it shrinks
// radially. Row 0 is untouched.
Eigen::MatrixXd prox_group_l1(const Eigen::MatrixXd& theta, double eta_eps);

// Penalized observed-data objective (minimization sign): the negative
// mixture log-likelihood under the current baseline plus the group-lasso
// term. Event contributions use the baseline's jump at the event time, so
// the baseline must step at every observed event time (Breslow and
// Nelson-Aalen baselines do).
double observed_objective(const ScsParams& params, const Dataset& ds, double epsilon);

// Generalized EM fit with seeded restarts; returns the restart with the
// best (lowest) final penalized objective, canonicalized so that omega <= 0
// when the spec has both +1 and -1 groups.
FitResult fit(const Dataset& ds, const FitConfig& config);

struct SparsityResult {
    double epsilon = 0.0;
    FitResult fit;
    bool target_unreachable = false;  // active set jumped below the target
    // (epsilon, active-set size) for every evaluated fit, in evaluation order.
    std::vector<std::pair<double, int>> path;
};

// Searches a log-scale grid of penalty strengths for the fit whose active
// feature count is as large as possible while not exceeding the target.
SparsityResult select_sparsity(const Dataset& ds, const FitConfig& config, int target_features);

}  // namespace scs
