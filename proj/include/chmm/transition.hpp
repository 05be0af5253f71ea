#pragma once

#include <Eigen/Dense>

#include "chmm/errors.hpp"

namespace chmm {

inline constexpr double kProbFloor = 1e-12;

bool is_row_stochastic(const Eigen::MatrixXd& tpm, double tol = 1e-9);

/// Throws NumericalError if a row fails the sum-to-one / nonnegativity
/// invariants.
void validate_tpm(const Eigen::MatrixXd& tpm, double tol = 1e-9);

/// Solves delta * Gamma = delta subject to sum(delta) = 1, by a direct
/// linear solve with one balance equation replaced by the normalisation
/// constraint. Throws NumericalError for reducible chains without a
/// unique solution.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& tpm);

/// Row-wise multinomial logit with the diagonal entry as reference
/// category. Entries below kProbFloor are floored first; *floored is set
/// when that happened. Output length K*(K-1), row-major.
Eigen::VectorXd tpm_to_working(const Eigen::MatrixXd& tpm, bool* floored = nullptr);

/// Inverse of tpm_to_working; rows are exactly stochastic.
Eigen::MatrixXd working_to_tpm(const Eigen::VectorXd& working, int dim);

/// Single stochastic row (length n) -> n-1 log-ratios against row[ref].
void row_to_working(const Eigen::VectorXd& row, int ref, double* out, bool* floored = nullptr);

/// Inverse of row_to_working.
void working_to_row(const double* working, int ref, Eigen::Ref<Eigen::VectorXd> row);

} // namespace chmm
