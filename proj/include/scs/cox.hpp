// Weighted Cox proportional-hazards regression by Newton's method with
// step-halving, plus the matching Breslow baseline cumulative hazard.
// Self-contained on purpose: this solver is the reference path that the EM
// machinery is checked against, so it shares no code with it.
#pragma once

#include <Eigen/Dense>

#include "scs/types.hpp"

namespace scs {

struct CoxFitOptions {
    int max_iter = 100;
    double score_tol = 1e-9;  // convergence on the max |score| component
    int max_halvings = 20;
    double coef_cap = 30.0;  // beyond this the likelihood is monotone in practice
};

struct CoxFitResult {
    Eigen::VectorXd coef;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Weighted partial log-likelihood with Breslow tie handling; risk set is
// {j : u_j >= t}. Pass an empty weights vector for unit weights.
double cox_partial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                          const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& coef);

// Gradient (score) of the weighted partial log-likelihood at `coef`.
Eigen::VectorXd cox_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                          const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& coef);

CoxFitResult cox_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                     const Eigen::VectorXi& event, const Eigen::VectorXd& weights = {},
                     const CoxFitOptions& opts = {});

// Breslow estimate of the baseline cumulative hazard at the fitted
// coefficients; jumps at distinct event times, accumulated with u <= t.
StepFunction cox_breslow_baseline(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                                  const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& coef);

// Convenience: fit on a dataset's covariate matrix only (no treatment term).
CoxFitResult cox_fit_covariates(const Dataset& ds, const CoxFitOptions& opts = {});

}  // namespace scs
