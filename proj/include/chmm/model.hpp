#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chmm/coupling.hpp"
#include "chmm/emissions.hpp"
#include "chmm/state_space.hpp"

namespace chmm {

/// Full description of a (coupled) state-switching model: chains,
/// coupling form, emission families, covariate design.
struct ModelSpec {
    StateSpace space;
    CouplingKind coupling = CouplingKind::CartesianFull;
    std::vector<EmissionFamily> families;  // size M
    std::vector<int> covariate_counts;     // p per chain; nonzero only for NormalRegression

    /// Dimension of the state space the model runs on (N for SingleChain).
    int run_dim() const { return chmm::run_dim(coupling, space); }

    /// 0-based state of chain m within running state k.
    int chain_state0(int k, int m) const {
        return coupling == CouplingKind::SingleChain ? k : chain_state_of(k, m, space);
    }

    int transition_param_count() const { return count_parameters(coupling, space); }
    int emission_param_count() const;
    int free_param_count() const { return transition_param_count() + emission_param_count(); }

    void validate() const;
};

/// Natural (constrained) parameters of a model.
struct NaturalParams {
    CouplingParams coupling;
    std::vector<std::vector<StateEmission>> emissions; // [chain][state]
};

/// Length of the unconstrained working vector (equals free_param_count).
int working_dim(const ModelSpec& spec);

/// Natural -> unconstrained working vector. Layout: transition block,
/// per-chain emission blocks, mixture-weight block. *floored is set if a
/// probability was floored at 1e-12 before the log transform.
Eigen::VectorXd pack_working(const ModelSpec& spec, const NaturalParams& params,
                             bool* floored = nullptr);

/// Inverse of pack_working; all probability rows come out exactly
/// stochastic.
NaturalParams unpack_working(const ModelSpec& spec, const Eigen::VectorXd& working);

/// Product-space (or N x N for SingleChain) TPM implied by the params.
Eigen::MatrixXd model_tpm(const ModelSpec& spec, const NaturalParams& params);

/// Natural parameters flattened for reporting (full probability rows,
/// emission parameters, mixture weights), aligned with natural_labels.
Eigen::VectorXd flatten_natural(const ModelSpec& spec, const NaturalParams& params);
std::vector<std::string> natural_labels(const ModelSpec& spec);

/// Relabels states within each chain by ascending emission location, for
/// run-to-run comparability. SingleChain orders its shared states by the
/// summed location across streams.
NaturalParams order_states(const ModelSpec& spec, const NaturalParams& params);

} // namespace chmm
