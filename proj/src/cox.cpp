#include "scs/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace scs {

namespace {

struct SortedView {
    std::vector<std::size_t> order;  // ascending time, stable
    explicit SortedView(const Eigen::VectorXd& time) {
        order.resize(static_cast<std::size_t>(time.size()));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
    }
};

}  // namespace

double cox_partial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                          const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& coef) {
    const Eigen::Index n = X.rows();
    const Eigen::VectorXd eta = X * coef;
    const SortedView sv(time);
    double loglik = 0.0;
    double risk_sum = 0.0;
    // Walk times descending; subjects enter the risk sum when u_j >= t.
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(n) - 1;
    while (pos >= 0) {
        const double t = time[sv.order[static_cast<std::size_t>(pos)]];
        std::ptrdiff_t lo = pos;
        while (lo >= 0 && time[sv.order[static_cast<std::size_t>(lo)]] == t) --lo;
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const std::size_t j = sv.order[static_cast<std::size_t>(q)];
            const double w = weights.size() ? weights[static_cast<Eigen::Index>(j)] : 1.0;
            risk_sum += w * std::exp(eta[static_cast<Eigen::Index>(j)]);
        }
        const double log_den = std::log(risk_sum);
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const std::size_t j = sv.order[static_cast<std::size_t>(q)];
            if (event[static_cast<Eigen::Index>(j)] == 1) {
                const double w = weights.size() ? weights[static_cast<Eigen::Index>(j)] : 1.0;
                loglik += w * (eta[static_cast<Eigen::Index>(j)] - log_den);
            }
        }
        pos = lo;
    }
    return loglik;
}

Eigen::VectorXd cox_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                          const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& coef) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::VectorXd eta = X * coef;
    const SortedView sv(time);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(n) - 1;
    while (pos >= 0) {
        const double t = time[sv.order[static_cast<std::size_t>(pos)]];
        std::ptrdiff_t lo = pos;
        while (lo >= 0 && time[sv.order[static_cast<std::size_t>(lo)]] == t) --lo;
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const Eigen::Index jj = static_cast<Eigen::Index>(sv.order[static_cast<std::size_t>(q)]);
            const double w = weights.size() ? weights[jj] : 1.0;
            const double r = w * std::exp(eta[jj]);
            s0 += r;
            s1 += r * X.row(jj).transpose();
        }
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const Eigen::Index jj = static_cast<Eigen::Index>(sv.order[static_cast<std::size_t>(q)]);
            if (event[jj] == 1) {
                const double w = weights.size() ? weights[jj] : 1.0;
                score += w * (X.row(jj).transpose() - s1 / s0);
            }
        }
        pos = lo;
    }
    return score;
}

namespace {

// Score and observed information of the weighted partial likelihood.
void cox_score_info(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                    const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                    const Eigen::VectorXd& coef, Eigen::VectorXd& score, Eigen::MatrixXd& info) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::VectorXd eta = X * coef;
    const SortedView sv(time);
    score.setZero(p);
    info.setZero(p, p);
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(n) - 1;
    while (pos >= 0) {
        const double t = time[sv.order[static_cast<std::size_t>(pos)]];
        std::ptrdiff_t lo = pos;
        while (lo >= 0 && time[sv.order[static_cast<std::size_t>(lo)]] == t) --lo;
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const std::size_t j = sv.order[static_cast<std::size_t>(q)];
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            const double w = weights.size() ? weights[jj] : 1.0;
            const double r = w * std::exp(eta[jj]);
            s0 += r;
            s1 += r * X.row(jj).transpose();
            s2.noalias() += r * X.row(jj).transpose() * X.row(jj);
        }
        const Eigen::VectorXd xbar = s1 / s0;
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const std::size_t j = sv.order[static_cast<std::size_t>(q)];
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            if (event[jj] == 1) {
                const double w = weights.size() ? weights[jj] : 1.0;
                score += w * (X.row(jj).transpose() - xbar);
                info += w * (s2 / s0 - xbar * xbar.transpose());
            }
        }
        pos = lo;
    }
}

}  // namespace

CoxFitResult cox_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                     const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                     const CoxFitOptions& opts) {
    const Eigen::Index p = X.cols();
    double total_events = 0.0;
    for (Eigen::Index i = 0; i < event.size(); ++i) {
        if (event[i] == 1) total_events += weights.size() ? weights[i] : 1.0;
    }
    if (total_events <= 0.0) {
        throw EstimationError("cox fit: no events");
    }
    CoxFitResult res;
    res.coef = Eigen::VectorXd::Zero(p);
    res.loglik = cox_partial_loglik(X, time, event, weights, res.coef);
    Eigen::VectorXd score(p);
    Eigen::MatrixXd info(p, p);
    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        cox_score_info(X, time, event, weights, res.coef, score, info);
        if (score.lpNorm<Eigen::Infinity>() < opts.score_tol) {
            res.converged = true;
            res.iterations = it;
            break;
        }
        // Ridge-stabilized solve in case the information matrix is singular.
        Eigen::MatrixXd reg = info;
        reg.diagonal().array() += 1e-10;
        Eigen::VectorXd step = reg.ldlt().solve(score);
        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            const Eigen::VectorXd cand = res.coef + scale * step;
            const double ll = cox_partial_loglik(X, time, event, weights, cand);
            if (std::isfinite(ll) && ll >= res.loglik) {
                res.coef = cand;
                res.loglik = ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            res.converged = score.lpNorm<Eigen::Infinity>() < 1e-6;
            break;
        }
        if (res.coef.lpNorm<Eigen::Infinity>() > opts.coef_cap) {
            throw EstimationError(
                "cox fit: coefficient exceeded cap, likelihood appears monotone "
                "(no events in one level of a covariate?)");
        }
    }
    return res;
}

StepFunction cox_breslow_baseline(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                                  const Eigen::VectorXi& event, const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& coef) {
    const Eigen::Index n = X.rows();
    const Eigen::VectorXd eta = X * coef;
    const SortedView sv(time);
    // Collect denominators walking backward, then accumulate jumps forward.
    std::vector<double> event_times;
    std::vector<double> jumps;
    double risk_sum = 0.0;
    std::vector<std::pair<double, double>> rev;  // (time, jump) in descending time
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(n) - 1;
    while (pos >= 0) {
        const double t = time[sv.order[static_cast<std::size_t>(pos)]];
        std::ptrdiff_t lo = pos;
        double death_weight = 0.0;
        while (lo >= 0 && time[sv.order[static_cast<std::size_t>(lo)]] == t) --lo;
        for (std::ptrdiff_t q = pos; q > lo; --q) {
            const std::size_t j = sv.order[static_cast<std::size_t>(q)];
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            const double w = weights.size() ? weights[jj] : 1.0;
            risk_sum += w * std::exp(eta[jj]);
            if (event[jj] == 1) death_weight += w;
        }
        if (death_weight > 0.0) {
            rev.emplace_back(t, death_weight / risk_sum);
        }
        pos = lo;
    }
    double cum = 0.0;
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
        cum += it->second;
        event_times.push_back(it->first);
        jumps.push_back(cum);
    }
    return StepFunction(std::move(event_times), std::move(jumps), 0.0);
}

CoxFitResult cox_fit_covariates(const Dataset& ds, const CoxFitOptions& opts) {
    return cox_fit(ds.covariates(), ds.times(), ds.events(), {}, opts);
}

}  // namespace scs
