#include "chmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chmm/transition.hpp"

namespace chmm {

namespace {

int emission_params_per_state(EmissionFamily family, int p) {
    switch (family) {
    case EmissionFamily::Normal: return 2;           // mean, sigma
    case EmissionFamily::Beta: return 2;             // alpha, beta
    case EmissionFamily::NormalRegression: return p + 2; // coefs, sigma
    }
    throw ConfigError("unknown emission family");
}

} // namespace

int ModelSpec::emission_param_count() const {
    int count = 0;
    for (int m = 0; m < space.num_chains; ++m) {
        count += space.states_per_chain *
                 emission_params_per_state(families[m], covariate_counts[m]);
    }
    return count;
}

void ModelSpec::validate() const {
    if (static_cast<int>(families.size()) != space.num_chains ||
        static_cast<int>(covariate_counts.size()) != space.num_chains) {
        throw ConfigError("ModelSpec: families/covariate_counts must have one entry per chain");
    }
    for (int m = 0; m < space.num_chains; ++m) {
        if (covariate_counts[m] < 0) throw ConfigError("ModelSpec: negative covariate count");
        if (covariate_counts[m] > 0 && families[m] != EmissionFamily::NormalRegression) {
            throw ConfigError("ModelSpec: covariates given for a non-regression chain");
        }
    }
}

int working_dim(const ModelSpec& spec) { return spec.free_param_count(); }

namespace {

// Reference category for a CondIndep marginal row: the chain's own
// previous state, so independent persistence sits at working value 0.
int cond_indep_ref(int prev_product, int chain, const StateSpace& space) {
    return chain_state_of(prev_product, chain, space);
}

void pack_emission(const StateEmission& em, int p, double* out) {
    switch (em.family) {
    case EmissionFamily::Normal:
        out[0] = em.mean;
        out[1] = std::log(em.sigma);
        break;
    case EmissionFamily::Beta:
        out[0] = std::log(em.alpha);
        out[1] = std::log(em.beta);
        break;
    case EmissionFamily::NormalRegression:
        for (int j = 0; j <= p; ++j) out[j] = em.coef(j);
        out[p + 1] = std::log(em.sigma);
        break;
    }
}

StateEmission unpack_emission(EmissionFamily family, int p, const double* in) {
    StateEmission em;
    em.family = family;
    switch (family) {
    case EmissionFamily::Normal:
        em.mean = in[0];
        em.sigma = std::exp(in[1]);
        break;
    case EmissionFamily::Beta:
        em.alpha = std::exp(in[0]);
        em.beta = std::exp(in[1]);
        break;
    case EmissionFamily::NormalRegression:
        em.coef.resize(p + 1);
        for (int j = 0; j <= p; ++j) em.coef(j) = in[j];
        em.sigma = std::exp(in[p + 1]);
        break;
    }
    return em;
}

} // namespace

Eigen::VectorXd pack_working(const ModelSpec& spec, const NaturalParams& params, bool* floored) {
    spec.validate();
    const int m_count = spec.space.num_chains;
    const int n = spec.space.states_per_chain;
    const int k = spec.space.product_dim();
    Eigen::VectorXd w(working_dim(spec));
    Eigen::Index pos = 0;

    switch (spec.coupling) {
    case CouplingKind::CartesianFull:
        for (int i = 0; i < k; ++i) {
            row_to_working(params.coupling.cartesian.row(i), i, w.data() + pos, floored);
            pos += k - 1;
        }
        break;
    case CouplingKind::CondIndep:
        for (int m = 0; m < m_count; ++m) {
            for (int prev = 0; prev < k; ++prev) {
                row_to_working(params.coupling.cond_marginals[m].row(prev),
                               cond_indep_ref(prev, m, spec.space), w.data() + pos, floored);
                pos += n - 1;
            }
        }
        break;
    case CouplingKind::MixtureWeight:
        for (int m = 0; m < m_count; ++m) {
            for (int src = 0; src < m_count; ++src) {
                for (int i = 0; i < n; ++i) {
                    row_to_working(params.coupling.pair_tpms[m][src].row(i), i,
                                   w.data() + pos, floored);
                    pos += n - 1;
                }
            }
        }
        break;
    case CouplingKind::IndependentChains:
        for (int m = 0; m < m_count; ++m) {
            for (int i = 0; i < n; ++i) {
                row_to_working(params.coupling.chain_tpms[m].row(i), i, w.data() + pos, floored);
                pos += n - 1;
            }
        }
        break;
    case CouplingKind::SingleChain:
        for (int i = 0; i < n; ++i) {
            row_to_working(params.coupling.chain_tpms.at(0).row(i), i, w.data() + pos, floored);
            pos += n - 1;
        }
        break;
    }

    for (int m = 0; m < m_count; ++m) {
        const int per_state = emission_params_per_state(spec.families[m], spec.covariate_counts[m]);
        for (int s = 0; s < n; ++s) {
            pack_emission(params.emissions[m][s], spec.covariate_counts[m], w.data() + pos);
            pos += per_state;
        }
    }

    if (spec.coupling == CouplingKind::MixtureWeight) {
        for (int m = 0; m < m_count; ++m) {
            row_to_working(params.coupling.mixture_weights.row(m), m, w.data() + pos, floored);
            pos += m_count - 1;
        }
    }
    return w;
}

NaturalParams unpack_working(const ModelSpec& spec, const Eigen::VectorXd& working) {
    spec.validate();
    if (working.size() != working_dim(spec)) {
        throw ConfigError("unpack_working: vector length " + std::to_string(working.size()) +
                          " does not match working dimension " +
                          std::to_string(working_dim(spec)));
    }
    const int m_count = spec.space.num_chains;
    const int n = spec.space.states_per_chain;
    const int k = spec.space.product_dim();
    NaturalParams params;
    params.coupling.kind = spec.coupling;
    Eigen::Index pos = 0;

    switch (spec.coupling) {
    case CouplingKind::CartesianFull: {
        params.coupling.cartesian.resize(k, k);
        for (int i = 0; i < k; ++i) {
            Eigen::VectorXd row(k);
            working_to_row(working.data() + pos, i, row);
            params.coupling.cartesian.row(i) = row;
            pos += k - 1;
        }
        break;
    }
    case CouplingKind::CondIndep: {
        params.coupling.cond_marginals.assign(m_count, Eigen::MatrixXd(k, n));
        for (int m = 0; m < m_count; ++m) {
            for (int prev = 0; prev < k; ++prev) {
                Eigen::VectorXd row(n);
                working_to_row(working.data() + pos, cond_indep_ref(prev, m, spec.space), row);
                params.coupling.cond_marginals[m].row(prev) = row;
                pos += n - 1;
            }
        }
        break;
    }
    case CouplingKind::MixtureWeight: {
        params.coupling.pair_tpms.assign(m_count,
                                         std::vector<Eigen::MatrixXd>(m_count,
                                                                      Eigen::MatrixXd(n, n)));
        for (int m = 0; m < m_count; ++m) {
            for (int src = 0; src < m_count; ++src) {
                for (int i = 0; i < n; ++i) {
                    Eigen::VectorXd row(n);
                    working_to_row(working.data() + pos, i, row);
                    params.coupling.pair_tpms[m][src].row(i) = row;
                    pos += n - 1;
                }
            }
        }
        break;
    }
    case CouplingKind::IndependentChains: {
        params.coupling.chain_tpms.assign(m_count, Eigen::MatrixXd(n, n));
        for (int m = 0; m < m_count; ++m) {
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd row(n);
                working_to_row(working.data() + pos, i, row);
                params.coupling.chain_tpms[m].row(i) = row;
                pos += n - 1;
            }
        }
        break;
    }
    case CouplingKind::SingleChain: {
        params.coupling.chain_tpms.assign(1, Eigen::MatrixXd(n, n));
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd row(n);
            working_to_row(working.data() + pos, i, row);
            params.coupling.chain_tpms[0].row(i) = row;
            pos += n - 1;
        }
        break;
    }
    }

    params.emissions.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        const int per_state = emission_params_per_state(spec.families[m], spec.covariate_counts[m]);
        params.emissions[m].resize(n);
        for (int s = 0; s < n; ++s) {
            params.emissions[m][s] =
                unpack_emission(spec.families[m], spec.covariate_counts[m], working.data() + pos);
            pos += per_state;
        }
    }

    if (spec.coupling == CouplingKind::MixtureWeight) {
        params.coupling.mixture_weights.resize(m_count, m_count);
        for (int m = 0; m < m_count; ++m) {
            Eigen::VectorXd row(m_count);
            working_to_row(working.data() + pos, m, row);
            params.coupling.mixture_weights.row(m) = row;
            pos += m_count - 1;
        }
    }
    return params;
}

Eigen::MatrixXd model_tpm(const ModelSpec& spec, const NaturalParams& params) {
    return build_tpm(params.coupling, spec.space);
}

namespace {

void append_emission_natural(const ModelSpec& spec, const NaturalParams& params,
                             std::vector<double>* values, std::vector<std::string>* labels) {
    for (int m = 0; m < spec.space.num_chains; ++m) {
        for (int s = 0; s < spec.space.states_per_chain; ++s) {
            const auto& em = params.emissions[m][s];
            const std::string base =
                "chain" + std::to_string(m + 1) + ".state" + std::to_string(s + 1) + ".";
            switch (spec.families[m]) {
            case EmissionFamily::Normal:
                values->push_back(em.mean);
                labels->push_back(base + "mean");
                values->push_back(em.sigma);
                labels->push_back(base + "sigma");
                break;
            case EmissionFamily::Beta:
                values->push_back(em.alpha);
                labels->push_back(base + "alpha");
                values->push_back(em.beta);
                labels->push_back(base + "beta");
                break;
            case EmissionFamily::NormalRegression:
                for (int j = 0; j <= spec.covariate_counts[m]; ++j) {
                    values->push_back(em.coef(j));
                    labels->push_back(base + "beta" + std::to_string(j));
                }
                values->push_back(em.sigma);
                labels->push_back(base + "sigma");
                break;
            }
        }
    }
}

void append_matrix(const Eigen::MatrixXd& mat, const std::string& name,
                   std::vector<double>* values, std::vector<std::string>* labels) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            values->push_back(mat(i, j));
            labels->push_back(name + "[" + std::to_string(i + 1) + "][" +
                              std::to_string(j + 1) + "]");
        }
    }
}

void flatten_impl(const ModelSpec& spec, const NaturalParams& params,
                  std::vector<double>* values, std::vector<std::string>* labels) {
    const int m_count = spec.space.num_chains;
    switch (spec.coupling) {
    case CouplingKind::CartesianFull:
        append_matrix(params.coupling.cartesian, "gamma", values, labels);
        break;
    case CouplingKind::CondIndep:
        for (int m = 0; m < m_count; ++m) {
            append_matrix(params.coupling.cond_marginals[m],
                          "marginal.chain" + std::to_string(m + 1), values, labels);
        }
        break;
    case CouplingKind::MixtureWeight:
        for (int m = 0; m < m_count; ++m) {
            for (int src = 0; src < m_count; ++src) {
                append_matrix(params.coupling.pair_tpms[m][src],
                              "pair.chain" + std::to_string(m + 1) + ".from" +
                                  std::to_string(src + 1),
                              values, labels);
            }
        }
        break;
    case CouplingKind::IndependentChains:
        for (int m = 0; m < m_count; ++m) {
            append_matrix(params.coupling.chain_tpms[m], "gamma.chain" + std::to_string(m + 1),
                          values, labels);
        }
        break;
    case CouplingKind::SingleChain:
        append_matrix(params.coupling.chain_tpms.at(0), "gamma", values, labels);
        break;
    }
    append_emission_natural(spec, params, values, labels);
    if (spec.coupling == CouplingKind::MixtureWeight) {
        append_matrix(params.coupling.mixture_weights, "weight", values, labels);
    }
}

} // namespace

Eigen::VectorXd flatten_natural(const ModelSpec& spec, const NaturalParams& params) {
    std::vector<double> values;
    std::vector<std::string> labels;
    flatten_impl(spec, params, &values, &labels);
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<std::string> natural_labels(const ModelSpec& spec) {
    NaturalParams dummy = unpack_working(spec, Eigen::VectorXd::Zero(working_dim(spec)));
    std::vector<double> values;
    std::vector<std::string> labels;
    flatten_impl(spec, dummy, &values, &labels);
    return labels;
}

namespace {

// perm[new_state] = old_state, per chain.
using ChainPerms = std::vector<std::vector<int>>;

std::vector<int> product_perm(const ChainPerms& perms, const StateSpace& space) {
    const int k = space.product_dim();
    std::vector<int> perm(k);
    for (int knew = 0; knew < k; ++knew) {
        std::vector<int> old_states(space.num_chains);
        for (int m = 0; m < space.num_chains; ++m) {
            old_states[m] = perms[m][chain_state_of(knew, m, space)] + 1;
        }
        perm[knew] = encode_product_state(old_states, space);
    }
    return perm;
}

Eigen::MatrixXd permute_square(const Eigen::MatrixXd& mat, const std::vector<int>& row_perm,
                               const std::vector<int>& col_perm) {
    Eigen::MatrixXd out(mat.rows(), mat.cols());
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            out(i, j) = mat(row_perm[i], col_perm[j]);
        }
    }
    return out;
}

} // namespace

NaturalParams order_states(const ModelSpec& spec, const NaturalParams& params) {
    const int m_count = spec.space.num_chains;
    const int n = spec.space.states_per_chain;

    ChainPerms perms(m_count, std::vector<int>(n));
    if (spec.coupling == CouplingKind::SingleChain) {
        // Shared state index: order by summed location across streams.
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::sort(perm.begin(), perm.end(), [&](int a, int b) {
            double la = 0, lb = 0;
            for (int m = 0; m < m_count; ++m) {
                la += params.emissions[m][a].location();
                lb += params.emissions[m][b].location();
            }
            return la < lb;
        });
        for (int m = 0; m < m_count; ++m) perms[m] = perm;
    } else {
        for (int m = 0; m < m_count; ++m) {
            std::iota(perms[m].begin(), perms[m].end(), 0);
            std::sort(perms[m].begin(), perms[m].end(), [&](int a, int b) {
                return params.emissions[m][a].location() < params.emissions[m][b].location();
            });
        }
    }

    NaturalParams out;
    out.coupling.kind = params.coupling.kind;
    out.emissions.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        out.emissions[m].resize(n);
        for (int s = 0; s < n; ++s) out.emissions[m][s] = params.emissions[m][perms[m][s]];
    }

    switch (spec.coupling) {
    case CouplingKind::CartesianFull: {
        const auto pperm = product_perm(perms, spec.space);
        out.coupling.cartesian = permute_square(params.coupling.cartesian, pperm, pperm);
        break;
    }
    case CouplingKind::CondIndep: {
        const auto pperm = product_perm(perms, spec.space);
        out.coupling.cond_marginals.resize(m_count);
        for (int m = 0; m < m_count; ++m) {
            const auto& old = params.coupling.cond_marginals[m];
            Eigen::MatrixXd block(old.rows(), old.cols());
            for (Eigen::Index r = 0; r < old.rows(); ++r) {
                for (int j = 0; j < n; ++j) block(r, j) = old(pperm[r], perms[m][j]);
            }
            out.coupling.cond_marginals[m] = block;
        }
        break;
    }
    case CouplingKind::MixtureWeight: {
        out.coupling.pair_tpms.assign(m_count, std::vector<Eigen::MatrixXd>(m_count));
        for (int m = 0; m < m_count; ++m) {
            for (int src = 0; src < m_count; ++src) {
                out.coupling.pair_tpms[m][src] =
                    permute_square(params.coupling.pair_tpms[m][src], perms[src], perms[m]);
            }
        }
        out.coupling.mixture_weights = params.coupling.mixture_weights;
        break;
    }
    case CouplingKind::IndependentChains: {
        out.coupling.chain_tpms.resize(m_count);
        for (int m = 0; m < m_count; ++m) {
            out.coupling.chain_tpms[m] =
                permute_square(params.coupling.chain_tpms[m], perms[m], perms[m]);
        }
        break;
    }
    case CouplingKind::SingleChain: {
        out.coupling.chain_tpms.resize(1);
        out.coupling.chain_tpms[0] =
            permute_square(params.coupling.chain_tpms.at(0), perms[0], perms[0]);
        break;
    }
    }
    return out;
}

} // namespace chmm
