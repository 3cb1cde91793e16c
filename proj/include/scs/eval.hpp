// Phenotype-recovery ROC curves and subgroup-size sweeps of treatment
// effect estimates.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scs/estimators.hpp"
#include "scs/model.hpp"
#include "scs/types.hpp"

namespace scs {

struct RocCurve {
    std::vector<double> thresholds;  // descending unique scores
    std::vector<double> tpr;
    std::vector<double> fpr;
    double auc = 0.0;
};

// Threshold sweep over the unique scores with trapezoidal area; ties share
// an operating point, so the area equals the pairwise concordance
// probability with ties counted half.
RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels);

struct SweepRow {
    double fraction = 0.0;
    std::size_t n_selected = 0;
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::size_t n_events = 0;
    EffectEstimate estimate;
    bool estimable = true;
    std::string note;  // reason when not estimable
};

struct SubgroupReport {
    std::string method;
    Metric metric = Metric::hazard_ratio;
    std::optional<double> horizon;
    std::vector<SweepRow> rows;
};

// For each fraction q, selects the ceil(q*n) highest-scoring subjects (ties
// broken by subject index) and estimates the treatment effect inside the
// selection. Rows where the estimate is undefined are flagged rather than
// failing the sweep.
SubgroupReport subgroup_sweep(const std::vector<double>& scores, const Dataset& ds,
                              const std::vector<double>& fractions, Metric metric,
                              double horizon, const std::string& method,
                              const BootstrapConfig& boot = {});

// Gating probability of `target_group` for every subject; the usual score
// vector for sweeps and ROC curves.
std::vector<double> gating_scores(const ScsParams& params, const Dataset& ds, int target_group);

inline std::vector<double> default_fractions() { return {0.2, 0.4, 0.6, 0.8}; }

}  // namespace scs
