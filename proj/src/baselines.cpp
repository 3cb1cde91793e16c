#include "scs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scs/cox.hpp"

namespace scs {

std::string scorer_kind_name(ScorerKind k) {
    switch (k) {
        case ScorerKind::cox_int: return "cox_int";
        case ScorerKind::bin_int: return "bin_int";
        case ScorerKind::cox_tlr: return "cox_tlr";
    }
    return "unknown";
}

ScorerKind scorer_kind_from_name(const std::string& name) {
    if (name == "cox_int" || name == "cox-int") return ScorerKind::cox_int;
    if (name == "bin_int" || name == "bin-int") return ScorerKind::bin_int;
    if (name == "cox_tlr" || name == "cox-tlr") return ScorerKind::cox_tlr;
    throw ArgumentError("unknown scorer kind '" + name + "'");
}

double PhenotypeScorer::raw_score(const Eigen::VectorXd& x) const {
    if (x.size() != theta.size()) {
        throw ArgumentError("scorer: covariate dimension mismatch");
    }
    double s = theta.dot(x);
    if (kind == ScorerKind::cox_tlr) s += intercept;
    return s;
}

double PhenotypeScorer::benefit_score(const Eigen::VectorXd& x) const {
    // cox_int interactions multiply the hazard, so negative scores mean
    // benefit; the other two model survival, where positive means benefit.
    const double s = raw_score(x);
    return kind == ScorerKind::cox_int ? -s : s;
}

namespace {

// Interaction design [x, a*x] reordered by ascending time so the Cox
// machinery's internal sort stays cheap inside the optimizer loop.
struct InteractionData {
    Eigen::MatrixXd Z;
    Eigen::VectorXd time;
    Eigen::VectorXi event;

    explicit InteractionData(const Dataset& ds) {
        const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
        const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
        std::vector<std::size_t> order(ds.n());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ds.record(a).time < ds.record(b).time;
        });
        Z.resize(n, 2 * d);
        time.resize(n);
        event.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const SubjectRecord& r = ds.record(order[static_cast<std::size_t>(i)]);
            Z.row(i).head(d) = r.covariates.transpose();
            Z.row(i).tail(d) = static_cast<double>(r.treatment) * r.covariates.transpose();
            time[i] = r.time;
            event[i] = r.event;
        }
    }
};

double logistic_nll(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w, double intercept, Eigen::VectorXd* grad_w,
                    double* grad_intercept) {
    const Eigen::VectorXd s = (Z * w).array() + intercept;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        // log(1 + e^s) - y*s, computed stably.
        nll += std::max(s[i], 0.0) + std::log1p(std::exp(-std::abs(s[i]))) - y[i] * s[i];
    }
    if (grad_w || grad_intercept) {
        const Eigen::VectorXd resid =
            (1.0 / (1.0 + (-s.array()).exp())) - y.array();
        if (grad_w) *grad_w = Z.transpose() * resid;
        if (grad_intercept) *grad_intercept = resid.sum();
    }
    return nll;
}

}  // namespace

double cox_int_objective(const Dataset& ds, const Eigen::VectorXd& w) {
    const InteractionData data(ds);
    return -cox_partial_loglik(data.Z, data.time, data.event, {}, w);
}

Eigen::VectorXd cox_int_gradient(const Dataset& ds, const Eigen::VectorXd& w) {
    const InteractionData data(ds);
    return -cox_score(data.Z, data.time, data.event, {}, w);
}

PhenotypeScorer fit_cox_int(const Dataset& ds, double l1, const IstaOptions& opts) {
    if (ds.n_events() == 0) {
        throw EstimationError("cox_int: no events");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
    const InteractionData data(ds);
    auto smooth = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
        if (grad) *grad = -cox_score(data.Z, data.time, data.event, {}, w);
        return -cox_partial_loglik(data.Z, data.time, data.event, {}, w);
    };
    std::vector<bool> penalized(static_cast<std::size_t>(2 * d), false);
    for (std::size_t j = static_cast<std::size_t>(d); j < penalized.size(); ++j) {
        penalized[j] = true;  // lasso on the interaction block only
    }
    IstaResult sol = ista_minimize(smooth, Eigen::VectorXd::Zero(2 * d), l1, penalized, opts);
    PhenotypeScorer scorer;
    scorer.kind = ScorerKind::cox_int;
    scorer.beta = sol.x.head(d);
    scorer.theta = sol.x.tail(d);
    return scorer;
}

namespace {

struct BinIntData {
    Eigen::MatrixXd Z;  // [x, a*x]
    Eigen::VectorXd y;
    int excluded = 0;
    int positives = 0;

    BinIntData(const Dataset& ds, double horizon) {
        const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
        std::vector<std::size_t> keep;
        std::vector<double> labels;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const SubjectRecord& r = ds.record(i);
            if (r.event == 0 && r.time < horizon) {
                ++excluded;  // censored before the horizon: outcome unknown
                continue;
            }
            const double label = r.event == 1 ? (r.time > horizon ? 1.0 : 0.0) : 1.0;
            keep.push_back(i);
            labels.push_back(label);
            positives += label == 1.0 ? 1 : 0;
        }
        Z.resize(static_cast<Eigen::Index>(keep.size()), 2 * d);
        y.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t row = 0; row < keep.size(); ++row) {
            const SubjectRecord& r = ds.record(keep[row]);
            Z.row(static_cast<Eigen::Index>(row)).head(d) = r.covariates.transpose();
            Z.row(static_cast<Eigen::Index>(row)).tail(d) =
                static_cast<double>(r.treatment) * r.covariates.transpose();
            y[static_cast<Eigen::Index>(row)] = labels[row];
        }
    }
};

}  // namespace

double bin_int_objective(const Dataset& ds, double horizon, const Eigen::VectorXd& w) {
    const BinIntData data(ds, horizon);
    return logistic_nll(data.Z, data.y, w.head(w.size() - 1), w[w.size() - 1], nullptr, nullptr);
}

Eigen::VectorXd bin_int_gradient(const Dataset& ds, double horizon, const Eigen::VectorXd& w) {
    const BinIntData data(ds, horizon);
    Eigen::VectorXd grad_w(w.size() - 1);
    double grad_b = 0.0;
    logistic_nll(data.Z, data.y, w.head(w.size() - 1), w[w.size() - 1], &grad_w, &grad_b);
    Eigen::VectorXd grad(w.size());
    grad.head(w.size() - 1) = grad_w;
    grad[w.size() - 1] = grad_b;
    return grad;
}

PhenotypeScorer fit_bin_int(const Dataset& ds, double horizon, double l1,
                            const IstaOptions& opts) {
    if (!(horizon > 0.0)) {
        throw ArgumentError("bin_int: horizon must be positive");
    }
    const BinIntData data(ds, horizon);
    const Eigen::Index kept = data.y.size();
    if (data.positives == 0 || data.positives == kept) {
        throw EstimationError("bin_int: one outcome class is empty after exclusion (" +
                              std::to_string(data.positives) + " of " + std::to_string(kept) +
                              " survived past the horizon, " + std::to_string(data.excluded) +
                              " excluded)");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
    auto smooth = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
        if (grad) {
            Eigen::VectorXd gw(2 * d);
            double gb = 0.0;
            const double f =
                logistic_nll(data.Z, data.y, w.head(2 * d), w[2 * d], &gw, &gb);
            grad->resize(2 * d + 1);
            grad->head(2 * d) = gw;
            (*grad)[2 * d] = gb;
            return f;
        }
        return logistic_nll(data.Z, data.y, w.head(2 * d), w[2 * d], nullptr, nullptr);
    };
    std::vector<bool> penalized(static_cast<std::size_t>(2 * d + 1), false);
    for (std::size_t j = static_cast<std::size_t>(d); j < static_cast<std::size_t>(2 * d); ++j) {
        penalized[j] = true;
    }
    IstaResult sol =
        ista_minimize(smooth, Eigen::VectorXd::Zero(2 * d + 1), l1, penalized, opts);
    PhenotypeScorer scorer;
    scorer.kind = ScorerKind::bin_int;
    scorer.beta = sol.x.head(d);
    scorer.theta = sol.x.segment(d, d);
    scorer.intercept = sol.x[2 * d];
    scorer.horizon = horizon;
    scorer.excluded = data.excluded;
    return scorer;
}

PhenotypeScorer fit_cox_tlr(const Dataset& ds, double horizon, double l1,
                            const IstaOptions& opts) {
    if (!(horizon > 0.0)) {
        throw ArgumentError("cox_tlr: horizon must be positive");
    }
    const Dataset treated = ds.treated_arm();
    const Dataset control = ds.control_arm();
    if (treated.n_events() == 0) {
        throw EstimationError("cox_tlr: no events in the treated arm");
    }
    if (control.n_events() == 0) {
        throw EstimationError("cox_tlr: no events in the control arm");
    }
    const auto arm_survival = [horizon](const Dataset& arm) {
        const CoxFitResult fit = cox_fit_covariates(arm);
        const StepFunction base =
            cox_breslow_baseline(arm.covariates(), arm.times(), arm.events(), {}, fit.coef);
        const double lam = base(horizon);
        return std::pair<Eigen::VectorXd, double>(fit.coef, lam);
    };
    const auto [coef1, lam1] = arm_survival(treated);
    const auto [coef0, lam0] = arm_survival(control);

    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
    Eigen::VectorXd labels(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd& x = ds.record(static_cast<std::size_t>(i)).covariates;
        const double f1 = std::exp(-lam1 * std::exp(coef1.dot(x)));
        const double f0 = std::exp(-lam0 * std::exp(coef0.dot(x)));
        // Ties go to the control side so identical arms give an all-zero rule.
        labels[i] = (f1 - f0 > 1e-12) ? 1.0 : 0.0;
    }

    auto smooth = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
        if (grad) {
            Eigen::VectorXd gw(d);
            double gb = 0.0;
            const double f =
                logistic_nll(ds.covariates(), labels, w.head(d), w[d], &gw, &gb);
            grad->resize(d + 1);
            grad->head(d) = gw;
            (*grad)[d] = gb;
            // A one-class label vector pushes the intercept to infinity;
            // freeze its gradient once the fitted probability saturates.
            if (std::abs(w[d]) > 30.0) (*grad)[d] = 0.0;
            return f;
        }
        return logistic_nll(ds.covariates(), labels, w.head(d), w[d], nullptr, nullptr);
    };
    std::vector<bool> penalized(static_cast<std::size_t>(d + 1), true);
    penalized[static_cast<std::size_t>(d)] = false;  // intercept unpenalized
    IstaResult sol = ista_minimize(smooth, Eigen::VectorXd::Zero(d + 1), l1, penalized, opts);
    PhenotypeScorer scorer;
    scorer.kind = ScorerKind::cox_tlr;
    scorer.theta = sol.x.head(d);
    scorer.intercept = sol.x[d];
    scorer.horizon = horizon;
    return scorer;
}

}  // namespace scs
