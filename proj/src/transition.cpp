#include "chmm/transition.hpp"

#include <cmath>
#include <string>

namespace chmm {

bool is_row_stochastic(const Eigen::MatrixXd& tpm, double tol) {
    if (tpm.rows() != tpm.cols() || tpm.rows() < 1) return false;
    if ((tpm.array() < -tol).any()) return false;
    for (Eigen::Index i = 0; i < tpm.rows(); ++i) {
        if (std::abs(tpm.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

void validate_tpm(const Eigen::MatrixXd& tpm, double tol) {
    if (tpm.rows() != tpm.cols()) {
        throw NumericalError("transition matrix is not square");
    }
    for (Eigen::Index i = 0; i < tpm.rows(); ++i) {
        if ((tpm.row(i).array() < -tol).any()) {
            throw NumericalError("transition matrix row " + std::to_string(i) +
                                 " has a negative entry");
        }
        const double sum = tpm.row(i).sum();
        if (std::abs(sum - 1.0) > tol) {
            throw NumericalError("transition matrix row " + std::to_string(i) +
                                 " sums to " + std::to_string(sum));
        }
    }
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& tpm) {
    validate_tpm(tpm);
    const Eigen::Index k = tpm.rows();
    // (Gamma' - I) delta = 0, last balance equation replaced by 1' delta = 1.
    Eigen::MatrixXd a = tpm.transpose() - Eigen::MatrixXd::Identity(k, k);
    a.row(k - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    b(k - 1) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        throw NumericalError("stationary distribution is not unique (reducible chain)");
    }
    Eigen::VectorXd delta = lu.solve(b);

    if ((delta.array() < -1e-10).any()) {
        throw NumericalError("stationary solve produced negative probabilities");
    }
    delta = delta.cwiseMax(0.0);
    delta /= delta.sum();
    const double residual = ((delta.transpose() * tpm).transpose() - delta)
                                .cwiseAbs()
                                .maxCoeff();
    if (residual > 1e-10) {
        throw NumericalError("stationary solve residual " + std::to_string(residual));
    }
    return delta;
}

void row_to_working(const Eigen::VectorXd& row, int ref, double* out, bool* floored) {
    const Eigen::Index n = row.size();
    Eigen::VectorXd p = row;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (p(j) < kProbFloor) {
            p(j) = kProbFloor;
            if (floored) *floored = true;
        }
    }
    const double log_ref = std::log(p(ref));
    int idx = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == ref) continue;
        out[idx++] = std::log(p(j)) - log_ref;
    }
}

void working_to_row(const double* working, int ref, Eigen::Ref<Eigen::VectorXd> row) {
    const Eigen::Index n = row.size();
    // Stable softmax over {0, w_1, ..., w_{n-1}} with the reference at 0.
    double max_w = 0.0;
    for (Eigen::Index j = 0; j + 1 < n; ++j) max_w = std::max(max_w, working[j]);
    double denom = std::exp(-max_w); // reference term
    int idx = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == ref) {
            row(j) = std::exp(-max_w);
        } else {
            row(j) = std::exp(working[idx++] - max_w);
            denom += row(j);
        }
    }
    row /= denom;
}

Eigen::VectorXd tpm_to_working(const Eigen::MatrixXd& tpm, bool* floored) {
    validate_tpm(tpm);
    const Eigen::Index k = tpm.rows();
    Eigen::VectorXd w(k * (k - 1));
    for (Eigen::Index i = 0; i < k; ++i) {
        row_to_working(tpm.row(i), static_cast<int>(i), w.data() + i * (k - 1), floored);
    }
    return w;
}

Eigen::MatrixXd working_to_tpm(const Eigen::VectorXd& working, int dim) {
    if (working.size() != static_cast<Eigen::Index>(dim) * (dim - 1)) {
        throw ConfigError("working_to_tpm: vector length does not match dimension");
    }
    Eigen::MatrixXd tpm(dim, dim);
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd row(dim);
        working_to_row(working.data() + static_cast<Eigen::Index>(i) * (dim - 1), i, row);
        tpm.row(i) = row;
    }
    return tpm;
}

} // namespace chmm
