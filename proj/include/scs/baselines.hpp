// Sparse comparison methods sharing one proximal-L1 solver:
//   cox_int  - Cox model with lasso-penalized treatment interactions,
//   bin_int  - logistic model of survival past a horizon with penalized
//              interactions, dropping records censored before the horizon,
//   cox_tlr  - per-arm Cox fits whose predicted-survival comparison labels
//              are distilled into an L1 logistic phenotyping rule.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "scs/optim.hpp"
#include "scs/types.hpp"

namespace scs {

enum class ScorerKind { cox_int, bin_int, cox_tlr };

std::string scorer_kind_name(ScorerKind k);
ScorerKind scorer_kind_from_name(const std::string& name);

struct PhenotypeScorer {
    ScorerKind kind = ScorerKind::cox_int;
    Eigen::VectorXd theta;  // coefficients of the phenotyping rule G(x)
    Eigen::VectorXd beta;   // nuisance main effects (empty for cox_tlr)
    double intercept = 0.0;
    std::optional<double> horizon;
    int excluded = 0;  // bin_int: records censored before the horizon

    // G(x) as defined by the method.
    double raw_score(const Eigen::VectorXd& x) const;
    // Oriented so that larger means more expected benefit from treatment.
    double benefit_score(const Eigen::VectorXd& x) const;
};

PhenotypeScorer fit_cox_int(const Dataset& ds, double l1, const IstaOptions& opts = {});
PhenotypeScorer fit_bin_int(const Dataset& ds, double horizon, double l1,
                            const IstaOptions& opts = {});
PhenotypeScorer fit_cox_tlr(const Dataset& ds, double horizon, double l1,
                            const IstaOptions& opts = {});

// Smooth parts of the two interaction objectives, exposed so the gradients
// can be checked against finite differences. Parameter layout:
//   cox_int: w = [beta (d); theta (d)]
//   bin_int: w = [beta (d); theta (d); intercept]
double cox_int_objective(const Dataset& ds, const Eigen::VectorXd& w);
Eigen::VectorXd cox_int_gradient(const Dataset& ds, const Eigen::VectorXd& w);
double bin_int_objective(const Dataset& ds, double horizon, const Eigen::VectorXd& w);
Eigen::VectorXd bin_int_gradient(const Dataset& ds, double horizon, const Eigen::VectorXd& w);

}  // namespace scs
