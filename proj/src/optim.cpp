#include "scs/optim.hpp"

#include <cmath>
#include <limits>

#include "scs/errors.hpp"

namespace scs {

double soft_threshold(double y, double threshold) {
    if (y > threshold) return y - threshold;
    if (y < -threshold) return y + threshold;
    return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& y, double threshold) {
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out[i] = soft_threshold(y[i], threshold);
    }
    return out;
}

namespace {

double penalty(const Eigen::VectorXd& x, double l1, const std::vector<bool>& penalized) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (penalized[static_cast<std::size_t>(i)]) p += std::abs(x[i]);
    }
    return l1 * p;
}

}  // namespace

IstaResult ista_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& smooth,
    const Eigen::VectorXd& x0, double l1, const std::vector<bool>& penalized,
    const IstaOptions& opts) {
    if (l1 < 0.0) {
        throw ArgumentError("ista_minimize: l1 must be non-negative");
    }
    if (penalized.size() != static_cast<std::size_t>(x0.size())) {
        throw ArgumentError("ista_minimize: mask size mismatch");
    }
    IstaResult res;
    res.x = x0;
    Eigen::VectorXd grad(x0.size());
    double f = smooth(res.x, &grad);
    double objective = f + penalty(res.x, l1, penalized);
    double eta = opts.eta0;
    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        bool accepted = false;
        Eigen::VectorXd cand(x0.size());
        for (int h = 0; h <= opts.max_halvings; ++h) {
            for (Eigen::Index j = 0; j < x0.size(); ++j) {
                const double step = res.x[j] - eta * grad[j];
                cand[j] = penalized[static_cast<std::size_t>(j)]
                              ? soft_threshold(step, eta * l1)
                              : step;
            }
            const double f_cand = smooth(cand, nullptr);
            // Standard proximal backtracking: accept when the smooth part is
            // dominated by its quadratic model at the current step size.
            const Eigen::VectorXd diff = cand - res.x;
            const double bound =
                f + grad.dot(diff) + diff.squaredNorm() / (2.0 * eta);
            if (std::isfinite(f_cand) && f_cand <= bound + 1e-12) {
                const double cand_objective = f_cand + penalty(cand, l1, penalized);
                const double change = std::abs(objective - cand_objective);
                res.x = cand;
                f = smooth(res.x, &grad);
                objective = cand_objective;
                accepted = true;
                if (change <= opts.tol * std::max(1.0, std::abs(objective))) {
                    res.converged = true;
                }
                break;
            }
            eta *= 0.5;
        }
        if (!accepted || res.converged) {
            res.converged = res.converged || !accepted;
            break;
        }
        // Allow the step to grow back so a single steep region does not
        // permanently shrink it.
        eta = std::min(eta * 2.0, opts.eta0);
    }
    res.objective = objective;
    return res;
}

}  // namespace scs
