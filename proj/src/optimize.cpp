#include "chmm/optimize.hpp"

#include <cmath>
#include <limits>

namespace chmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluation wrapper: any exception or NaN counts as +inf, so the line
// search simply backtracks out of bad regions.
double safe_eval(const ObjectiveFn& f, const Eigen::VectorXd& x) {
    try {
        const double v = f(x);
        return std::isnan(v) ? kInf : v;
    } catch (...) {
        return kInf;
    }
}

} // namespace

Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x, double scale) {
    Eigen::VectorXd grad(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = scale * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + h;
        const double fp = safe_eval(f, xp);
        xp(i) = x(i) - h;
        const double fm = safe_eval(f, xp);
        xp(i) = x(i);
        grad(i) = (fp - fm) / (2.0 * h);
    }
    return grad;
}

Eigen::MatrixXd fd_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x, double scale) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = scale * std::max(1.0, std::abs(x(i)));

    Eigen::MatrixXd hess(n, n);
    const double f0 = safe_eval(f, x);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        xp(i) = x(i) + h(i);
        const double fp = safe_eval(f, xp);
        xp(i) = x(i) - h(i);
        const double fm = safe_eval(f, xp);
        xp(i) = x(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            xp(i) = x(i) + h(i);
            xp(j) = x(j) + h(j);
            const double fpp = safe_eval(f, xp);
            xp(j) = x(j) - h(j);
            const double fpm = safe_eval(f, xp);
            xp(i) = x(i) - h(i);
            const double fmm = safe_eval(f, xp);
            xp(j) = x(j) + h(j);
            const double fmp = safe_eval(f, xp);
            xp(i) = x(i);
            xp(j) = x(j);
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
        }
    }
    return hess;
}

BfgsResult bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options) {
    const Eigen::Index n = x0.size();
    BfgsResult result;
    result.x = x0;
    result.f = safe_eval(f, x0);
    if (!std::isfinite(result.f)) {
        result.message = "objective not finite at the starting point";
        return result;
    }

    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd grad = fd_gradient(f, result.x);
    constexpr double c1 = 1e-4;
    bool scaled = false;   // initial Hessian rescaled from the first update pair
    int stall_count = 0;   // consecutive iterations with negligible progress

    for (int iter = 0; iter < options.max_iter; ++iter) {
        result.iterations = iter + 1;
        if (grad.cwiseAbs().maxCoeff() <= options.grad_tol) {
            result.converged = true;
            result.message = "gradient tolerance reached";
            return result;
        }

        Eigen::VectorXd direction = -(h_inv * grad);
        double slope = grad.dot(direction);
        if (!(slope < 0)) {
            // Reset to steepest descent if curvature information degraded.
            h_inv.setIdentity();
            direction = -grad;
            slope = grad.dot(direction);
        }

        // Backtracking line search with sufficient decrease.
        double step = 1.0;
        double f_new = kInf;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = result.x + step * direction;
            f_new = safe_eval(f, x_new);
            if (f_new <= result.f + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            result.message = "line search failed to find sufficient decrease";
            return result;
        }

        const Eigen::VectorXd grad_new = fd_gradient(f, x_new);
        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                const double yy = y.squaredNorm();
                if (yy > 0) {
                    h_inv *= sy / yy;
                }
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd i_mat = Eigen::MatrixXd::Identity(n, n);
            h_inv = (i_mat - rho * s * y.transpose()) * h_inv *
                        (i_mat - rho * y * s.transpose()) +
                    rho * s * s.transpose();
        }

        const double f_change = std::abs(result.f - f_new);
        result.x = x_new;
        result.f = f_new;
        grad = grad_new;

        // A single heavily backtracked step can make negligible progress even
        // far from a stationary point, so require sustained stagnation.
        if (f_change <= options.rel_f_tol * (1.0 + std::abs(f_new))) {
            ++stall_count;
        } else {
            stall_count = 0;
        }
        if (stall_count >= 3) {
            result.converged = true;
            result.message = "relative objective change below tolerance";
            return result;
        }
    }
    result.message = "maximum iterations reached";
    return result;
}

} // namespace chmm
