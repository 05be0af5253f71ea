#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace chmm {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Central finite-difference gradient, step scale * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                            double scale = 6e-6);

/// Central finite-difference Hessian, step scale * max(1, |x_i|).
Eigen::MatrixXd fd_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x,
                           double scale = 1e-5);

struct BfgsOptions {
    int max_iter = 500;
    double grad_tol = 1e-6;   // infinity norm of the gradient
    double rel_f_tol = 1e-9;  // relative objective change
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Quasi-Newton (BFGS) minimisation with a backtracking line search under
/// the Armijo sufficient-decrease condition; gradients by central finite
/// differences. Throws nothing: objective exceptions propagate from the
/// initial evaluation only, later failures end the run with the best
/// point found.
BfgsResult bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options = {});

} // namespace chmm
