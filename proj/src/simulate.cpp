#include "chmm/simulate.hpp"

#include <cmath>
#include <random>

#include "chmm/likelihood.hpp"
#include "chmm/transition.hpp"

namespace chmm {

namespace {

int sample_categorical(const Eigen::VectorXd& probs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cum += probs(i);
        if (u <= cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

double sample_emission(const StateEmission& em, const Eigen::RowVectorXd& cov,
                       std::mt19937_64& rng) {
    switch (em.family) {
    case EmissionFamily::Normal: {
        std::normal_distribution<double> normal(em.mean, em.sigma);
        return normal(rng);
    }
    case EmissionFamily::Beta: {
        std::gamma_distribution<double> ga(em.alpha, 1.0);
        std::gamma_distribution<double> gb(em.beta, 1.0);
        const double x = ga(rng);
        const double y = gb(rng);
        return x / (x + y);
    }
    case EmissionFamily::NormalRegression: {
        double mu = em.coef(0);
        for (Eigen::Index p = 0; p < cov.size(); ++p) mu += em.coef(p + 1) * cov(p);
        std::normal_distribution<double> normal(mu, em.sigma);
        return normal(rng);
    }
    }
    throw ConfigError("unknown emission family");
}

} // namespace

SimulatedData simulate(const ModelSpec& spec, const NaturalParams& params, int t_count,
                       std::uint64_t seed, const std::vector<Eigen::MatrixXd>& covariates) {
    spec.validate();
    if (t_count < 1) throw ConfigError("simulate: T must be >= 1");
    const int m_count = spec.space.num_chains;
    for (int m = 0; m < m_count; ++m) {
        if (spec.covariate_counts[m] > 0) {
            if (static_cast<int>(covariates.size()) <= m ||
                covariates[m].rows() != t_count ||
                covariates[m].cols() != spec.covariate_counts[m]) {
                throw DataError("simulate: chain " + std::to_string(m + 1) +
                                " needs a T x p covariate matrix");
            }
        }
    }

    const Eigen::MatrixXd tpm = model_tpm(spec, params);
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    std::mt19937_64 rng(seed);

    SimulatedData sim;
    sim.obs.y.resize(t_count, m_count);
    sim.obs.missing.setConstant(t_count, m_count, false);
    sim.obs.covariates.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        sim.obs.covariates[m] = spec.covariate_counts[m] > 0
                                    ? covariates[m]
                                    : Eigen::MatrixXd(t_count, 0);
    }
    sim.product_states.resize(t_count);
    sim.chain_states.resize(t_count, m_count);

    int state = sample_categorical(delta, rng);
    for (int t = 0; t < t_count; ++t) {
        if (t > 0) state = sample_categorical(tpm.row(state).transpose(), rng);
        sim.product_states(t) = state;
        for (int m = 0; m < m_count; ++m) {
            const int s = spec.chain_state0(state, m);
            sim.chain_states(t, m) = s + 1;
            Eigen::RowVectorXd cov;
            if (spec.covariate_counts[m] > 0) cov = sim.obs.covariates[m].row(t);
            sim.obs.y(t, m) = sample_emission(params.emissions[m][s], cov, rng);
        }
    }
    return sim;
}

double forecast_score(const ModelSpec& spec, const NaturalParams& params,
                      const ObservationSet& train, const ObservationSet& test) {
    if (test.T() == 0) return 0.0;
    const double joint = log_likelihood(spec, params, ObservationSet::concat(train, test));
    const double conditioning = log_likelihood(spec, params, train);
    if (!std::isfinite(joint) || !std::isfinite(conditioning)) {
        throw NumericalError("forecast_score: non-finite likelihood component");
    }
    return joint - conditioning;
}

} // namespace chmm
