#include "chmm/coupling.hpp"

#include <cmath>

#include "chmm/transition.hpp"

namespace chmm {

std::string to_string(CouplingKind kind) {
    switch (kind) {
    case CouplingKind::CartesianFull: return "cartesian_full";
    case CouplingKind::CondIndep: return "cond_indep";
    case CouplingKind::MixtureWeight: return "mixture_weight";
    case CouplingKind::IndependentChains: return "independent_chains";
    case CouplingKind::SingleChain: return "single_chain";
    }
    throw ConfigError("unknown coupling kind");
}

CouplingKind coupling_from_string(const std::string& name) {
    if (name == "cartesian_full") return CouplingKind::CartesianFull;
    if (name == "cond_indep") return CouplingKind::CondIndep;
    if (name == "mixture_weight") return CouplingKind::MixtureWeight;
    if (name == "independent_chains") return CouplingKind::IndependentChains;
    if (name == "single_chain") return CouplingKind::SingleChain;
    throw ConfigError("unknown coupling kind: " + name);
}

Eigen::MatrixXd build_cartesian(const Eigen::MatrixXd& tpm, const StateSpace& space) {
    const int k = space.product_dim();
    if (tpm.rows() != k || tpm.cols() != k) {
        throw ConfigError("build_cartesian: expected " + std::to_string(k) + "x" +
                          std::to_string(k) + " matrix");
    }
    validate_tpm(tpm);
    return tpm;
}

Eigen::MatrixXd build_independent(const std::vector<Eigen::MatrixXd>& chain_tpms,
                                  const StateSpace& space) {
    const int m = space.num_chains;
    const int n = space.states_per_chain;
    if (static_cast<int>(chain_tpms.size()) != m) {
        throw ConfigError("build_independent: expected one TPM per chain");
    }
    for (const auto& t : chain_tpms) {
        if (t.rows() != n || t.cols() != n) {
            throw ConfigError("build_independent: chain TPM has wrong shape");
        }
        validate_tpm(t);
    }
    // Kronecker product, chain 1 most significant.
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
    for (int c = 0; c < m; ++c) {
        Eigen::MatrixXd next(out.rows() * n, out.cols() * n);
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            for (Eigen::Index j = 0; j < out.cols(); ++j) {
                next.block(i * n, j * n, n, n) = out(i, j) * chain_tpms[c];
            }
        }
        out = std::move(next);
    }
    return out;
}

Eigen::MatrixXd build_cond_indep(const CondIndepMarginals& marginals, const StateSpace& space) {
    const int m = space.num_chains;
    const int n = space.states_per_chain;
    const int k = space.product_dim();
    if (static_cast<int>(marginals.size()) != m) {
        throw ConfigError("build_cond_indep: expected one marginal block per chain");
    }
    for (const auto& block : marginals) {
        if (block.rows() != k || block.cols() != n) {
            throw ConfigError("build_cond_indep: marginal block has wrong shape");
        }
        for (Eigen::Index i = 0; i < block.rows(); ++i) {
            if (std::abs(block.row(i).sum() - 1.0) > 1e-9 || (block.row(i).array() < 0).any()) {
                throw NumericalError("build_cond_indep: conditional distribution not stochastic");
            }
        }
    }
    Eigen::MatrixXd tpm(k, k);
    for (int prev = 0; prev < k; ++prev) {
        for (int next = 0; next < k; ++next) {
            double p = 1.0;
            for (int c = 0; c < m; ++c) {
                p *= marginals[c](prev, chain_state_of(next, c, space));
            }
            tpm(prev, next) = p;
        }
    }
    return tpm;
}

CondIndepMarginals mixture_to_cond_indep(const PairwiseMarginals& pair_tpms,
                                         const Eigen::MatrixXd& weights,
                                         const StateSpace& space) {
    const int m = space.num_chains;
    const int n = space.states_per_chain;
    const int k = space.product_dim();
    if (static_cast<int>(pair_tpms.size()) != m || weights.rows() != m || weights.cols() != m) {
        throw ConfigError("mixture_to_cond_indep: block shapes do not match M");
    }
    for (int c = 0; c < m; ++c) {
        if (static_cast<int>(pair_tpms[c].size()) != m) {
            throw ConfigError("mixture_to_cond_indep: expected M x M pairwise blocks");
        }
        if (std::abs(weights.row(c).sum() - 1.0) > 1e-9 || (weights.row(c).array() < 0).any()) {
            throw NumericalError("mixture weights row " + std::to_string(c) +
                                 " not a probability vector");
        }
        for (int src = 0; src < m; ++src) {
            if (pair_tpms[c][src].rows() != n || pair_tpms[c][src].cols() != n) {
                throw ConfigError("mixture_to_cond_indep: pairwise TPM has wrong shape");
            }
            validate_tpm(pair_tpms[c][src]);
        }
    }
    CondIndepMarginals marginals(m, Eigen::MatrixXd::Zero(k, n));
    for (int c = 0; c < m; ++c) {
        for (int prev = 0; prev < k; ++prev) {
            for (int src = 0; src < m; ++src) {
                const int src_state = chain_state_of(prev, src, space);
                marginals[c].row(prev) += weights(c, src) * pair_tpms[c][src].row(src_state);
            }
        }
    }
    return marginals;
}

Eigen::MatrixXd build_mixture_weight(const PairwiseMarginals& pair_tpms,
                                     const Eigen::MatrixXd& weights, const StateSpace& space) {
    return build_cond_indep(mixture_to_cond_indep(pair_tpms, weights, space), space);
}

Eigen::MatrixXd build_single_chain(const Eigen::MatrixXd& tpm, const StateSpace& space) {
    const int n = space.states_per_chain;
    if (tpm.rows() != n || tpm.cols() != n) {
        throw ConfigError("build_single_chain: expected " + std::to_string(n) + "x" +
                          std::to_string(n) + " matrix");
    }
    validate_tpm(tpm);
    return tpm;
}

Eigen::MatrixXd build_tpm(const CouplingParams& params, const StateSpace& space) {
    switch (params.kind) {
    case CouplingKind::CartesianFull: return build_cartesian(params.cartesian, space);
    case CouplingKind::CondIndep: return build_cond_indep(params.cond_marginals, space);
    case CouplingKind::MixtureWeight:
        return build_mixture_weight(params.pair_tpms, params.mixture_weights, space);
    case CouplingKind::IndependentChains: return build_independent(params.chain_tpms, space);
    case CouplingKind::SingleChain: return build_single_chain(params.chain_tpms.at(0), space);
    }
    throw ConfigError("unknown coupling kind");
}

int count_parameters(CouplingKind kind, const StateSpace& space) {
    const int m = space.num_chains;
    const int n = space.states_per_chain;
    const int k = space.product_dim();
    switch (kind) {
    case CouplingKind::CartesianFull: return k * (k - 1);
    case CouplingKind::CondIndep: return m * k * (n - 1);
    case CouplingKind::MixtureWeight: return m * m * n * (n - 1) + m * (m - 1);
    case CouplingKind::IndependentChains: return m * n * (n - 1);
    case CouplingKind::SingleChain: return n * (n - 1);
    }
    throw ConfigError("unknown coupling kind");
}

int run_dim(CouplingKind kind, const StateSpace& space) {
    return kind == CouplingKind::SingleChain ? space.states_per_chain : space.product_dim();
}

} // namespace chmm
