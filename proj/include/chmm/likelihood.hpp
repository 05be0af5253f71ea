#pragma once

#include <Eigen/Dense>

#include "chmm/model.hpp"

namespace chmm {

/// T x K matrix of log emission densities per running state.
Eigen::MatrixXd log_emission_matrix(const ModelSpec& spec, const NaturalParams& params,
                                    const ObservationSet& data);

/// Log of delta P_1 Gamma P_2 ... Gamma P_T 1', computed by the forward
/// recursion in log space with per-step log-sum-exp normalisation.
double forward_loglik(const Eigen::MatrixXd& tpm, const Eigen::VectorXd& delta,
                      const Eigen::MatrixXd& log_emissions);

/// Forward likelihood with delta tied to the stationary distribution of
/// the model's TPM.
double log_likelihood(const ModelSpec& spec, const NaturalParams& params,
                      const ObservationSet& data);
double log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& working,
                      const ObservationSet& data);

} // namespace chmm
