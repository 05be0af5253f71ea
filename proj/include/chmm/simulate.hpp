#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chmm/model.hpp"

namespace chmm {

struct SimulatedData {
    ObservationSet obs;
    Eigen::VectorXi product_states; // length T, 0-based running states
    Eigen::MatrixXi chain_states;   // T x M, 1-based
};

/// Samples S_1 from the stationary distribution, S_t | S_{t-1} from the
/// TPM, and observations from the state-dependent emissions.
/// Deterministic given seed. For NormalRegression chains, per-chain
/// covariate matrices must be supplied.
SimulatedData simulate(const ModelSpec& spec, const NaturalParams& params, int t_count,
                       std::uint64_t seed,
                       const std::vector<Eigen::MatrixXd>& covariates = {});

/// Conditional log-likelihood of the test block given the training block:
/// log L(train ++ test) - log L(train).
double forecast_score(const ModelSpec& spec, const NaturalParams& params,
                      const ObservationSet& train, const ObservationSet& test);

} // namespace chmm
