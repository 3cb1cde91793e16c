#include "scs/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>

#include "scs/cox.hpp"
#include "scs/estimators.hpp"
#include "scs/parallel.hpp"
#include "scs/rng.hpp"

namespace scs {

std::size_t LatentSpec::index_of(int k) const {
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i] == k) return i;
    }
    throw ArgumentError("group " + std::to_string(k) + " is not in the latent spec");
}

void LatentSpec::validate() const {
    const bool ok = groups == std::vector<int>{0} || groups == std::vector<int>{0, +1} ||
                    groups == std::vector<int>{0, +1, -1};
    if (!ok) {
        throw ArgumentError("latent spec must be (0), (0,+1) or (0,+1,-1)");
    }
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Time ordering shared by the partial likelihood, the Breslow update and the
// observed objective. Breakpoint indices are precomputed per subject because
// the baseline always steps exactly at the distinct event times.
struct SurvivalOrder {
    std::vector<std::size_t> order;   // ascending time, stable
    std::vector<std::size_t> starts;  // group boundaries of tied times, + sentinel
    std::vector<double> event_times;  // distinct times carrying >= 1 event
    std::vector<std::ptrdiff_t> cum_index;  // last event time <= u_i, or -1
    std::size_t n_events = 0;

    explicit SurvivalOrder(const Dataset& ds) {
        const std::size_t n = ds.n();
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ds.record(a).time < ds.record(b).time;
        });
        std::size_t pos = 0;
        while (pos < n) {
            starts.push_back(pos);
            const double t = ds.record(order[pos]).time;
            bool any_event = false;
            while (pos < n && ds.record(order[pos]).time == t) {
                if (ds.record(order[pos]).event == 1) {
                    any_event = true;
                    ++n_events;
                }
                ++pos;
            }
            if (any_event) event_times.push_back(t);
        }
        starts.push_back(n);
        cum_index.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto it = std::upper_bound(event_times.begin(), event_times.end(), ds.record(i).time);
            cum_index[i] = static_cast<std::ptrdiff_t>(it - event_times.begin()) - 1;
        }
    }
};

Eigen::VectorXd group_labels(const LatentSpec& latent) {
    Eigen::VectorXd k(static_cast<Eigen::Index>(latent.K()));
    for (std::size_t i = 0; i < latent.K(); ++i) {
        k[static_cast<Eigen::Index>(i)] = static_cast<double>(latent.groups[i]);
    }
    return k;
}

// Log relative hazards ln h_ik = beta'x_i + k * a_i * omega, one column per group.
Eigen::MatrixXd log_hazard_matrix(const Dataset& ds, const Eigen::VectorXd& beta, double omega,
                                  const Eigen::VectorXd& kvec) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    const Eigen::Index K = kvec.size();
    const Eigen::VectorXd eta = ds.covariates() * beta;
    Eigen::MatrixXd lnH(n, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        lnH.col(k) = eta.array() + kvec[k] * omega * ds.treatments().cast<double>().array();
    }
    return lnH;
}

void check_gamma(const PosteriorMatrix& gamma, const Dataset& ds, std::size_t K) {
    if (static_cast<std::size_t>(gamma.gamma.rows()) != ds.n() ||
        static_cast<std::size_t>(gamma.gamma.cols()) != K) {
        throw ArgumentError("posterior matrix must be n x K");
    }
}

double pl_core(const Dataset& ds, const SurvivalOrder& so, const Eigen::MatrixXd& gamma,
               const Eigen::MatrixXd& lnH) {
    const Eigen::MatrixXd H = lnH.array().exp();
    const Eigen::VectorXd W = (gamma.array() * H.array()).rowwise().sum();
    double loglik = 0.0;
    double risk_sum = 0.0;
    for (std::size_t m = so.starts.size() - 1; m-- > 0;) {
        for (std::size_t pos = so.starts[m]; pos < so.starts[m + 1]; ++pos) {
            risk_sum += W[static_cast<Eigen::Index>(so.order[pos])];
        }
        const double log_den = std::log(risk_sum);
        for (std::size_t pos = so.starts[m]; pos < so.starts[m + 1]; ++pos) {
            const std::size_t j = so.order[pos];
            if (ds.record(j).event != 1) continue;
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            loglik += (gamma.row(jj).array() * lnH.row(jj).array()).sum() -
                      gamma.row(jj).sum() * log_den;
        }
    }
    return loglik;
}

std::pair<Eigen::VectorXd, double> pl_grad_core(const Dataset& ds, const SurvivalOrder& so,
                                                const Eigen::MatrixXd& gamma,
                                                const Eigen::MatrixXd& lnH,
                                                const Eigen::VectorXd& kvec) {
    const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
    const Eigen::MatrixXd H = lnH.array().exp();
    const Eigen::VectorXd W = (gamma.array() * H.array()).rowwise().sum();
    // V_i = a_i * sum_k k * gamma_ik * h_ik drives the omega component.
    const Eigen::VectorXd V = ds.treatments().cast<double>().array() *
                              ((gamma.array() * H.array()).matrix() * kvec).array();
    Eigen::VectorXd grad_beta = Eigen::VectorXd::Zero(d);
    double grad_omega = 0.0;
    double sw = 0.0;
    Eigen::VectorXd swx = Eigen::VectorXd::Zero(d);
    double sv = 0.0;
    for (std::size_t m = so.starts.size() - 1; m-- > 0;) {
        for (std::size_t pos = so.starts[m]; pos < so.starts[m + 1]; ++pos) {
            const Eigen::Index jj = static_cast<Eigen::Index>(so.order[pos]);
            sw += W[jj];
            swx.noalias() += W[jj] * ds.covariates().row(jj).transpose();
            sv += V[jj];
        }
        for (std::size_t pos = so.starts[m]; pos < so.starts[m + 1]; ++pos) {
            const std::size_t j = so.order[pos];
            if (ds.record(j).event != 1) continue;
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            const double g = gamma.row(jj).sum();
            grad_beta.noalias() +=
                g * (ds.covariates().row(jj).transpose() - swx / sw);
            grad_omega += (gamma.row(jj) * kvec)(0) *
                              static_cast<double>(ds.record(j).treatment) -
                          g * sv / sw;
        }
    }
    return {grad_beta, grad_omega};
}

// Cumulative baseline hazard values over so.event_times.
std::vector<double> breslow_core(const Dataset& ds, const SurvivalOrder& so,
                                 const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& lnH) {
    const Eigen::MatrixXd H = lnH.array().exp();
    const Eigen::VectorXd W = (gamma.array() * H.array()).rowwise().sum();
    std::vector<double> jumps;
    jumps.reserve(so.event_times.size());
    double risk_sum = 0.0;
    std::vector<double> rev;
    for (std::size_t m = so.starts.size() - 1; m-- > 0;) {
        double death_weight = 0.0;
        for (std::size_t pos = so.starts[m]; pos < so.starts[m + 1]; ++pos) {
            const std::size_t j = so.order[pos];
            risk_sum += W[static_cast<Eigen::Index>(j)];
            if (ds.record(j).event == 1) {
                death_weight += gamma.row(static_cast<Eigen::Index>(j)).sum();
            }
        }
        if (death_weight > 0.0) rev.push_back(death_weight / risk_sum);
    }
    double cum = 0.0;
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
        cum += *it;
        jumps.push_back(cum);
    }
    return jumps;
}

Eigen::MatrixXd estep_core(const Dataset& ds, const Eigen::MatrixXd& theta,
                           const Eigen::MatrixXd& lnH, const Eigen::VectorXd& cumhaz,
                           int* degenerate_rows) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    const Eigen::Index K = theta.rows();
    const Eigen::MatrixXd H = lnH.array().exp();
    const Eigen::MatrixXd logits = ds.covariates() * theta.transpose();
    Eigen::MatrixXd gamma(n, K);
    int degenerate = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double delta = static_cast<double>(ds.record(static_cast<std::size_t>(i)).event);
        double m = kNegInf;
        Eigen::VectorXd lw(K);
        for (Eigen::Index k = 0; k < K; ++k) {
            lw[k] = delta * lnH(i, k) - H(i, k) * cumhaz[i] + logits(i, k);
            if (lw[k] > m) m = lw[k];
        }
        if (!std::isfinite(m)) {
            gamma.row(i).setConstant(1.0 / static_cast<double>(K));
            ++degenerate;
            continue;
        }
        double s = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            const double v = std::exp(lw[k] - m);
            gamma(i, k) = v;
            s += v;
        }
        gamma.row(i) /= s;
    }
    if (degenerate_rows) *degenerate_rows = degenerate;
    return gamma;
}

double group_norm(const Eigen::MatrixXd& theta) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        total += theta.col(j).norm();
    }
    return total;
}

// Posterior-weighted softmax cross-entropy (no penalty term).
double ce_core(const Dataset& ds, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& gamma) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    const Eigen::Index K = theta.rows();
    const Eigen::MatrixXd logits = ds.covariates() * theta.transpose();
    double ce = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = logits.row(i).maxCoeff();
        double s = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) s += std::exp(logits(i, k) - m);
        const double lse = m + std::log(s);
        ce += gamma.row(i).sum() * lse - (gamma.row(i).array() * logits.row(i).array()).sum();
    }
    return ce;
}

Eigen::MatrixXd ce_grad_core(const Dataset& ds, const Eigen::MatrixXd& theta,
                             const Eigen::MatrixXd& gamma) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    const Eigen::Index K = theta.rows();
    const Eigen::MatrixXd logits = ds.covariates() * theta.transpose();
    Eigen::MatrixXd resid(n, K);  // g_i * p_ik - gamma_ik
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = logits.row(i).maxCoeff();
        double s = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) s += std::exp(logits(i, k) - m);
        const double g = gamma.row(i).sum();
        for (Eigen::Index k = 0; k < K; ++k) {
            resid(i, k) = g * std::exp(logits(i, k) - m) / s - gamma(i, k);
        }
    }
    Eigen::MatrixXd grad = resid.transpose() * ds.covariates();
    if (grad.rows() > 0) grad.row(0).setZero();  // reference row is not free
    return grad;
}

// Negative mixture log-likelihood. `jumps` holds the baseline jump at each
// subject's own time (used for events only).
double neg_mixture_loglik(const Dataset& ds, const Eigen::MatrixXd& theta,
                          const Eigen::MatrixXd& lnH, const Eigen::VectorXd& cumhaz,
                          const Eigen::VectorXd& jumps) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    const Eigen::Index K = theta.rows();
    const Eigen::MatrixXd H = lnH.array().exp();
    const Eigen::MatrixXd logits = ds.covariates() * theta.transpose();
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool event = ds.record(static_cast<std::size_t>(i)).event == 1;
        const double delta = event ? 1.0 : 0.0;
        double m_core = kNegInf, m_gate = kNegInf;
        Eigen::VectorXd lw(K);
        for (Eigen::Index k = 0; k < K; ++k) {
            lw[k] = delta * lnH(i, k) - H(i, k) * cumhaz[i] + logits(i, k);
            m_core = std::max(m_core, lw[k]);
            m_gate = std::max(m_gate, logits(i, k));
        }
        if (!std::isfinite(m_core)) return std::numeric_limits<double>::infinity();
        double s_core = 0.0, s_gate = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            s_core += std::exp(lw[k] - m_core);
            s_gate += std::exp(logits(i, k) - m_gate);
        }
        loglik += m_core + std::log(s_core) - (m_gate + std::log(s_gate));
        if (event) {
            if (!(jumps[i] > 0.0)) return std::numeric_limits<double>::infinity();
            loglik += std::log(jumps[i]);
        }
    }
    return -loglik;
}

void gather_baseline(const SurvivalOrder& so, const std::vector<double>& lamcum,
                     Eigen::VectorXd& cumhaz, Eigen::VectorXd& jumps) {
    const std::size_t n = so.cum_index.size();
    cumhaz.resize(static_cast<Eigen::Index>(n));
    jumps.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::ptrdiff_t ci = so.cum_index[i];
        cumhaz[static_cast<Eigen::Index>(i)] =
            ci < 0 ? 0.0 : lamcum[static_cast<std::size_t>(ci)];
        jumps[static_cast<Eigen::Index>(i)] =
            ci < 0 ? 0.0
                   : lamcum[static_cast<std::size_t>(ci)] -
                         (ci > 0 ? lamcum[static_cast<std::size_t>(ci - 1)] : 0.0);
    }
}

}  // namespace

double relative_hazard(const ScsParams& params, const Eigen::VectorXd& x, int a, int k) {
    params.latent.index_of(k);
    if (x.size() != params.beta.size()) {
        throw ArgumentError("relative_hazard: covariate dimension mismatch");
    }
    return std::exp(params.beta.dot(x) + static_cast<double>(k) * static_cast<double>(a) *
                                             params.omega);
}

Eigen::VectorXd gating_probs(const Eigen::MatrixXd& theta, const Eigen::VectorXd& x) {
    if (x.size() != theta.cols()) {
        throw ArgumentError("gating_probs: covariate dimension mismatch");
    }
    const Eigen::VectorXd logits = theta * x;
    const double m = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - m).exp();
    return p / p.sum();
}

Eigen::VectorXd predict_gating(const ScsParams& params, const Eigen::VectorXd& x) {
    return gating_probs(params.theta, x);
}

PosteriorMatrix e_step(const ScsParams& params, const Dataset& ds, int* degenerate_rows) {
    params.latent.validate();
    const Eigen::VectorXd kvec = group_labels(params.latent);
    const Eigen::MatrixXd lnH = log_hazard_matrix(ds, params.beta, params.omega, kvec);
    Eigen::VectorXd cumhaz(static_cast<Eigen::Index>(ds.n()));
    for (std::size_t i = 0; i < ds.n(); ++i) {
        cumhaz[static_cast<Eigen::Index>(i)] = params.baseline_cumhaz(ds.record(i).time);
    }
    return PosteriorMatrix{estep_core(ds, params.theta, lnH, cumhaz, degenerate_rows)};
}

double weighted_partial_loglik(const ScsParams& params, const PosteriorMatrix& gamma,
                               const Dataset& ds) {
    if (ds.n_events() == 0) {
        throw EstimationError("weighted_partial_loglik: no events");
    }
    check_gamma(gamma, ds, params.latent.K());
    const SurvivalOrder so(ds);
    const Eigen::VectorXd kvec = group_labels(params.latent);
    return pl_core(ds, so, gamma.gamma, log_hazard_matrix(ds, params.beta, params.omega, kvec));
}

std::pair<Eigen::VectorXd, double> pl_gradient(const ScsParams& params,
                                               const PosteriorMatrix& gamma, const Dataset& ds) {
    if (ds.n_events() == 0) {
        throw EstimationError("pl_gradient: no events");
    }
    check_gamma(gamma, ds, params.latent.K());
    const SurvivalOrder so(ds);
    const Eigen::VectorXd kvec = group_labels(params.latent);
    return pl_grad_core(ds, so, gamma.gamma,
                        log_hazard_matrix(ds, params.beta, params.omega, kvec), kvec);
}

StepFunction breslow_update(const ScsParams& params, const PosteriorMatrix& gamma,
                            const Dataset& ds) {
    if (ds.n_events() == 0) {
        throw EstimationError("breslow_update: no events");
    }
    check_gamma(gamma, ds, params.latent.K());
    const SurvivalOrder so(ds);
    const Eigen::VectorXd kvec = group_labels(params.latent);
    std::vector<double> lamcum = breslow_core(
        ds, so, gamma.gamma, log_hazard_matrix(ds, params.beta, params.omega, kvec));
    return StepFunction(so.event_times, std::move(lamcum), 0.0);
}

double gating_objective(const Eigen::MatrixXd& theta, const PosteriorMatrix& gamma,
                        const Dataset& ds, double epsilon) {
    if (epsilon < 0.0) {
        throw ArgumentError("gating_objective: epsilon must be non-negative");
    }
    check_gamma(gamma, ds, static_cast<std::size_t>(theta.rows()));
    return ce_core(ds, theta, gamma.gamma) + epsilon * group_norm(theta);
}

Eigen::MatrixXd gating_gradient(const Eigen::MatrixXd& theta, const PosteriorMatrix& gamma,
                                const Dataset& ds) {
    check_gamma(gamma, ds, static_cast<std::size_t>(theta.rows()));
    return ce_grad_core(ds, theta, gamma.gamma);
}

Eigen::MatrixXd prox_group_l1(const Eigen::MatrixXd& theta, double eta_eps) {
    if (eta_eps < 0.0) {
        throw ArgumentError("prox_group_l1: threshold must be non-negative");
    }
    Eigen::MatrixXd out = theta;
    if (theta.rows() <= 1 || eta_eps == 0.0) return out;
    const Eigen::Index K = theta.rows();
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        const double nrm = theta.col(j).tail(K - 1).norm();
        if (nrm <= eta_eps) {
            out.col(j).tail(K - 1).setZero();
        } else {
            out.col(j).tail(K - 1) *= (nrm - eta_eps) / nrm;
        }
    }
    return out;
}

double observed_objective(const ScsParams& params, const Dataset& ds, double epsilon) {
    params.latent.validate();
    const Eigen::VectorXd kvec = group_labels(params.latent);
    const Eigen::MatrixXd lnH = log_hazard_matrix(ds, params.beta, params.omega, kvec);
    const Eigen::Index n = static_cast<Eigen::Index>(ds.n());
    Eigen::VectorXd cumhaz(n), jumps(n);
    const StepFunction& base = params.baseline_cumhaz;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double t = ds.record(i).time;
        const std::ptrdiff_t idx = base.index_at(t);
        cumhaz[static_cast<Eigen::Index>(i)] = base.value_at_index(idx);
        const bool at_breakpoint =
            idx >= 0 && base.breakpoints()[static_cast<std::size_t>(idx)] == t;
        jumps[static_cast<Eigen::Index>(i)] =
            at_breakpoint ? base.values()[static_cast<std::size_t>(idx)] -
                                base.value_at_index(idx - 1)
                          : 0.0;
    }
    return neg_mixture_loglik(ds, params.theta, lnH, cumhaz, jumps) +
           epsilon * group_norm(params.theta);
}

namespace {

struct RestartOutcome {
    Eigen::MatrixXd theta;
    Eigen::VectorXd beta;
    double omega = 0.0;
    std::vector<double> lamcum;
    std::vector<double> trace;
    int outer_iterations = 0;
    int degenerate_rows = 0;
};

RestartOutcome run_restart(const Dataset& ds, const SurvivalOrder& so, const FitConfig& config,
                           const Eigen::VectorXd& kvec, const Eigen::VectorXd& beta_init,
                           const std::vector<double>& lam_init, double omega_init) {
    const Eigen::Index d = static_cast<Eigen::Index>(ds.dim());
    const Eigen::Index K = kvec.size();
    RestartOutcome st;
    st.theta = Eigen::MatrixXd::Zero(K, d);
    st.beta = beta_init;
    st.omega = omega_init;
    st.lamcum = lam_init;

    Eigen::VectorXd cumhaz, jumps;
    gather_baseline(so, st.lamcum, cumhaz, jumps);
    Eigen::MatrixXd lnH = log_hazard_matrix(ds, st.beta, st.omega, kvec);
    st.trace.push_back(neg_mixture_loglik(ds, st.theta, lnH, cumhaz, jumps) +
                       config.epsilon * group_norm(st.theta));

    // Line searches start from the last accepted step so the step size can
    // grow through flat stretches; eta is the initial value.
    double eta_pl = config.eta;
    double eta_gate = config.eta;
    for (int outer = 0; outer < config.max_outer_iters; ++outer) {
        st.outer_iterations = outer + 1;
        gather_baseline(so, st.lamcum, cumhaz, jumps);
        lnH = log_hazard_matrix(ds, st.beta, st.omega, kvec);
        int degen = 0;
        const Eigen::MatrixXd gamma = estep_core(ds, st.theta, lnH, cumhaz, &degen);
        st.degenerate_rows = std::max(st.degenerate_rows, degen);

        double pl_cur = pl_core(ds, so, gamma, lnH);
        for (int b = 0; b < config.inner_steps; ++b) {
            // Ascent on (beta, omega); reject any step that fails to improve.
            auto [gb, gw] = pl_grad_core(ds, so, gamma, lnH, kvec);
            double step = eta_pl;
            for (int h = 0; h <= 20; ++h) {
                const Eigen::VectorXd cand_beta = st.beta + step * gb;
                const double cand_omega = st.omega + step * gw;
                const Eigen::MatrixXd cand_lnH =
                    log_hazard_matrix(ds, cand_beta, cand_omega, kvec);
                const double pl_cand = pl_core(ds, so, gamma, cand_lnH);
                if (std::isfinite(pl_cand) && pl_cand > pl_cur) {
                    st.beta = cand_beta;
                    st.omega = cand_omega;
                    lnH = cand_lnH;
                    pl_cur = pl_cand;
                    eta_pl = step * 2.0;
                    break;
                }
                step *= 0.5;
                if (h == 20) eta_pl = config.eta;
            }

            st.lamcum = breslow_core(ds, so, gamma, lnH);

            // Proximal descent on theta against its own penalized objective.
            const Eigen::MatrixXd grad = ce_grad_core(ds, st.theta, gamma);
            double gate_cur =
                ce_core(ds, st.theta, gamma) + config.epsilon * group_norm(st.theta);
            step = eta_gate;
            for (int h = 0; h <= 20; ++h) {
                const Eigen::MatrixXd cand =
                    prox_group_l1(st.theta - step * grad, step * config.epsilon);
                const double gate_cand =
                    ce_core(ds, cand, gamma) + config.epsilon * group_norm(cand);
                if (std::isfinite(gate_cand) && gate_cand < gate_cur) {
                    st.theta = cand;
                    gate_cur = gate_cand;
                    eta_gate = step * 2.0;
                    break;
                }
                step *= 0.5;
                if (h == 20) eta_gate = config.eta;
            }
        }

        gather_baseline(so, st.lamcum, cumhaz, jumps);
        const double objective = neg_mixture_loglik(ds, st.theta, lnH, cumhaz, jumps) +
                                 config.epsilon * group_norm(st.theta);
        if (!std::isfinite(objective)) {
            throw DivergenceError(
                "fit: non-finite objective at outer iteration " +
                std::to_string(outer + 1) +
                "; last finite objective " + std::to_string(st.trace.back()));
        }
        const double prev = st.trace.back();
        st.trace.push_back(objective);
        if (std::abs(prev - objective) <= config.tol * std::max(1.0, std::abs(prev))) {
            break;
        }
    }
    return st;
}

}  // namespace

FitResult fit(const Dataset& ds, const FitConfig& config) {
    config.latent.validate();
    if (config.epsilon < 0.0) throw ArgumentError("fit: epsilon must be non-negative");
    if (!(config.eta > 0.0)) throw ArgumentError("fit: eta must be positive");
    if (config.inner_steps < 1) throw ArgumentError("fit: inner_steps must be positive");
    if (config.max_outer_iters < 1) throw ArgumentError("fit: max_outer_iters must be positive");
    if (!(config.tol > 0.0)) throw ArgumentError("fit: tol must be positive");
    if (config.restarts < 1) throw ArgumentError("fit: restarts must be positive");
    if (ds.n_events() == 0) {
        throw EstimationError("fit: no events in dataset");
    }

    const SurvivalOrder so(ds);
    const Eigen::VectorXd kvec = group_labels(config.latent);

    Eigen::VectorXd beta_init = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.dim()));
    if (ds.dim() > 0) {
        try {
            beta_init = cox_fit_covariates(ds).coef;
        } catch (const Error&) {
            // fall back to zero start
        }
    }
    // Nelson-Aalen start for the baseline: uniform weights, unit hazards.
    std::vector<double> lam_init =
        breslow_core(ds, so,
                     Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ds.n()), kvec.size(),
                                               1.0 / static_cast<double>(kvec.size())),
                     Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.n()), kvec.size()));

    const std::size_t restarts = static_cast<std::size_t>(config.restarts);
    std::vector<std::optional<RestartOutcome>> outcomes(restarts);
    std::vector<std::exception_ptr> failures(restarts);
    parallel_for(restarts, config.threads, [&](std::size_t r) {
        try {
            Rng rng(Rng::stream(config.seed, r));
            const double omega0 = rng.normal(0.0, 0.1);
            outcomes[r] = run_restart(ds, so, config, kvec, beta_init, lam_init, omega0);
        } catch (...) {
            failures[r] = std::current_exception();
        }
    });
    for (std::size_t r = 0; r < restarts; ++r) {
        if (failures[r]) std::rethrow_exception(failures[r]);
    }

    std::size_t best = 0;
    std::vector<double> restart_objectives(restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        restart_objectives[r] = outcomes[r]->trace.back();
        if (restart_objectives[r] < restart_objectives[best]) best = r;
    }
    RestartOutcome& win = *outcomes[best];

    FitResult res;
    res.params.latent = config.latent;
    res.params.theta = std::move(win.theta);
    res.params.beta = std::move(win.beta);
    res.params.omega = win.omega;
    res.params.baseline_cumhaz = StepFunction(so.event_times, std::move(win.lamcum), 0.0);
    res.diagnostics.objective_trace = std::move(win.trace);
    res.diagnostics.outer_iterations = win.outer_iterations;
    res.diagnostics.final_objective = res.diagnostics.objective_trace.back();
    res.diagnostics.degenerate_rows = win.degenerate_rows;
    res.diagnostics.restart_objectives = std::move(restart_objectives);
    res.diagnostics.chosen_restart = static_cast<int>(best);

    // Relabel the benefit/harm groups so that omega <= 0: the likelihood is
    // invariant under (omega -> -omega, swap +1 and -1), and fixing the sign
    // makes group +1 the benefited group in reports.
    const auto& groups = config.latent.groups;
    const bool has_both = std::find(groups.begin(), groups.end(), +1) != groups.end() &&
                          std::find(groups.begin(), groups.end(), -1) != groups.end();
    if (has_both && res.params.omega > 0.0) {
        const Eigen::Index ip = static_cast<Eigen::Index>(config.latent.index_of(+1));
        const Eigen::Index im = static_cast<Eigen::Index>(config.latent.index_of(-1));
        res.params.theta.row(ip).swap(res.params.theta.row(im));
        res.params.omega = -res.params.omega;
        res.diagnostics.canonicalized = true;
    }

    for (std::size_t j = 0; j < ds.dim(); ++j) {
        if (res.params.theta.col(static_cast<Eigen::Index>(j)).norm() > 0.0) {
            res.diagnostics.active_features.push_back(static_cast<int>(j));
        }
    }
    return res;
}

SparsityResult select_sparsity(const Dataset& ds, const FitConfig& config, int target_features) {
    if (target_features < 1 || static_cast<std::size_t>(target_features) > ds.dim()) {
        throw ArgumentError("select_sparsity: target must be in [1, d]");
    }
    auto run = [&](double eps) {
        FitConfig c = config;
        c.epsilon = eps;
        return fit(ds, c);
    };
    auto active = [](const FitResult& f) {
        return static_cast<int>(f.diagnostics.active_features.size());
    };

    SparsityResult out;
    FitResult f0 = run(0.0);
    out.path.emplace_back(0.0, active(f0));
    if (active(f0) <= target_features) {
        out.epsilon = 0.0;
        out.fit = std::move(f0);
        return out;
    }

    // Grow the penalty by decades until the active set fits under the target.
    double lo = 0.0;
    double hi = 1e-4;
    FitResult best;
    int best_active = -1;
    double best_eps = 0.0;
    for (;;) {
        FitResult f = run(hi);
        const int a = active(f);
        out.path.emplace_back(hi, a);
        if (a <= target_features) {
            best = std::move(f);
            best_active = a;
            best_eps = hi;
            break;
        }
        lo = hi;
        hi *= 10.0;
        if (hi > 1e8) {
            throw EstimationError("select_sparsity: could not bracket the target");
        }
    }

    for (int probe = 0; probe < 16 && best_active != target_features; ++probe) {
        if (lo > 0.0 && hi / lo <= 1.1) break;
        const double mid = lo > 0.0 ? std::sqrt(lo * hi) : hi / 10.0;
        FitResult f = run(mid);
        const int a = active(f);
        out.path.emplace_back(mid, a);
        if (a <= target_features) {
            hi = mid;
            if (a > best_active || (a == best_active && mid < best_eps)) {
                best = std::move(f);
                best_active = a;
                best_eps = mid;
            }
        } else {
            lo = mid;
        }
    }

    out.epsilon = best_eps;
    out.fit = std::move(best);
    out.target_unreachable = best_active < target_features;
    return out;
}

}  // namespace scs
