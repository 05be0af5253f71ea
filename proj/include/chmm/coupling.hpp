#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chmm/state_space.hpp"

namespace chmm {

enum class CouplingKind {
    CartesianFull,     // unrestricted K x K product-space TPM
    CondIndep,         // Pr(S_t | S_{t-1}) = prod_m Pr(S_t^(m) | S_{t-1})
    MixtureWeight,     // marginals are weighted mixtures of pairwise laws
    IndependentChains, // Kronecker product of per-chain TPMs
    SingleChain        // one N-state chain driving all M streams
};

std::string to_string(CouplingKind kind);
CouplingKind coupling_from_string(const std::string& name);

/// Pr(S_t^(m) = j | S_{t-1} = product state): one K x N matrix per chain.
using CondIndepMarginals = std::vector<Eigen::MatrixXd>;

/// pair_tpms[m][n](i, j) = Pr(S_t^(m) = j | S_{t-1}^(n) = i), each N x N.
using PairwiseMarginals = std::vector<std::vector<Eigen::MatrixXd>>;

/// Parameter blocks for one coupling formulation; only the blocks of the
/// active kind are populated.
struct CouplingParams {
    CouplingKind kind = CouplingKind::CartesianFull;
    Eigen::MatrixXd cartesian;               // CartesianFull: K x K
    std::vector<Eigen::MatrixXd> chain_tpms; // IndependentChains: M of N x N; SingleChain: 1 of N x N
    CondIndepMarginals cond_marginals;       // CondIndep: M of K x N
    PairwiseMarginals pair_tpms;             // MixtureWeight: M x M of N x N
    Eigen::MatrixXd mixture_weights;         // MixtureWeight: M x M, rows sum to 1
};

Eigen::MatrixXd build_cartesian(const Eigen::MatrixXd& tpm, const StateSpace& space);
Eigen::MatrixXd build_independent(const std::vector<Eigen::MatrixXd>& chain_tpms,
                                  const StateSpace& space);
Eigen::MatrixXd build_cond_indep(const CondIndepMarginals& marginals, const StateSpace& space);

/// Collapses the weighted pairwise marginals to CondIndep form.
CondIndepMarginals mixture_to_cond_indep(const PairwiseMarginals& pair_tpms,
                                         const Eigen::MatrixXd& weights,
                                         const StateSpace& space);
Eigen::MatrixXd build_mixture_weight(const PairwiseMarginals& pair_tpms,
                                     const Eigen::MatrixXd& weights, const StateSpace& space);
Eigen::MatrixXd build_single_chain(const Eigen::MatrixXd& tpm, const StateSpace& space);

/// Dispatch over the active kind. For SingleChain the result is N x N.
Eigen::MatrixXd build_tpm(const CouplingParams& params, const StateSpace& space);

/// Free transition parameters after sum-to-one constraints.
int count_parameters(CouplingKind kind, const StateSpace& space);

/// State-space dimension the model runs on: N for SingleChain, N^M else.
int run_dim(CouplingKind kind, const StateSpace& space);

} // namespace chmm
