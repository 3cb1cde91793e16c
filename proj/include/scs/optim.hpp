// Proximal gradient (ISTA) machinery shared by the sparse baselines:
// componentwise soft thresholding with a mask of penalized coordinates and a
// backtracking proximal-gradient loop.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace scs {

double soft_threshold(double y, double threshold);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& y, double threshold);

struct IstaOptions {
    int max_iter = 5000;
    double tol = 1e-10;   // relative change of the penalized objective
    double eta0 = 1.0;    // initial step size, adapted by backtracking
    int max_halvings = 60;
};

struct IstaResult {
    Eigen::VectorXd x;
    double objective = 0.0;  // smooth part + l1 penalty
    int iterations = 0;
    bool converged = false;
};

// Minimizes f(x) + l1 * sum_{j in mask} |x_j| where `smooth` evaluates f and
// its gradient. Coordinates outside the mask are never thresholded.
IstaResult ista_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& smooth,
    const Eigen::VectorXd& x0, double l1, const std::vector<bool>& penalized,
    const IstaOptions& opts = {});

}  // namespace scs
