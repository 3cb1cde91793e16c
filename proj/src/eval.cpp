#include "scs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scs {

RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw ArgumentError("roc: scores and labels must have equal length");
    }
    std::size_t n_pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ArgumentError("roc: labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ArgumentError("roc: both classes must be present");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    RocCurve curve;
    curve.tpr.push_back(0.0);
    curve.fpr.push_back(0.0);
    double tp = 0.0, fp = 0.0, auc = 0.0;
    std::size_t pos = 0;
    while (pos < order.size()) {
        const double s = scores[order[pos]];
        double dtp = 0.0, dfp = 0.0;
        while (pos < order.size() && scores[order[pos]] == s) {
            (labels[order[pos]] == 1 ? dtp : dfp) += 1.0;
            ++pos;
        }
        const double prev_tpr = tp / static_cast<double>(n_pos);
        tp += dtp;
        fp += dfp;
        const double tpr = tp / static_cast<double>(n_pos);
        const double fpr = fp / static_cast<double>(n_neg);
        auc += (dfp / static_cast<double>(n_neg)) * 0.5 * (prev_tpr + tpr);
        curve.thresholds.push_back(s);
        curve.tpr.push_back(tpr);
        curve.fpr.push_back(fpr);
    }
    curve.auc = auc;
    return curve;
}

SubgroupReport subgroup_sweep(const std::vector<double>& scores, const Dataset& ds,
                              const std::vector<double>& fractions, Metric metric,
                              double horizon, const std::string& method,
                              const BootstrapConfig& boot) {
    if (scores.size() != ds.n()) {
        throw ArgumentError("subgroup_sweep: scores must align with the dataset");
    }
    if (ds.n_treated() == 0 || ds.n_treated() == ds.n()) {
        throw ArgumentError("subgroup_sweep: both arms must be present");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    SubgroupReport report;
    report.method = method;
    report.metric = metric;
    if (metric != Metric::hazard_ratio) report.horizon = horizon;
    for (double q : fractions) {
        if (!(q > 0.0) || q > 1.0) {
            throw ArgumentError("subgroup_sweep: fractions must lie in (0, 1]");
        }
        SweepRow row;
        row.fraction = q;
        const std::size_t count = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(ds.n()) - 1e-12));
        std::vector<std::size_t> chosen(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(chosen.begin(), chosen.end());
        const Dataset sub = ds.subset(chosen);
        row.n_selected = sub.n();
        row.n_treated = sub.n_treated();
        row.n_control = sub.n() - sub.n_treated();
        row.n_events = sub.n_events();
        try {
            switch (metric) {
                case Metric::hazard_ratio:
                    row.estimate = treatment_hr(sub, boot);
                    break;
                case Metric::risk_difference:
                    row.estimate = risk_difference(sub, horizon, boot);
                    break;
                case Metric::rmst_difference:
                    row.estimate = rmst_difference(sub, horizon, boot);
                    break;
            }
        } catch (const Error& err) {
            row.estimable = false;
            row.note = err.what();
            row.estimate.metric = metric;
            if (metric != Metric::hazard_ratio) row.estimate.horizon = horizon;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<double> gating_scores(const ScsParams& params, const Dataset& ds,
                                  int target_group) {
    const std::size_t col = params.latent.index_of(target_group);
    std::vector<double> scores(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        scores[i] = predict_gating(params, ds.record(i).covariates)[
            static_cast<Eigen::Index>(col)];
    }
    return scores;
}

}  // namespace scs
