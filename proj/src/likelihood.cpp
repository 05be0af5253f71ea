#include "chmm/likelihood.hpp"

#include <cmath>
#include <limits>

#include "chmm/transition.hpp"

namespace chmm {

Eigen::MatrixXd log_emission_matrix(const ModelSpec& spec, const NaturalParams& params,
                                    const ObservationSet& data) {
    if (data.M() != spec.space.num_chains) {
        throw DataError("log_emission_matrix: data has " + std::to_string(data.M()) +
                        " columns, model expects " + std::to_string(spec.space.num_chains));
    }
    const int t_count = data.T();
    const int k = spec.run_dim();
    Eigen::MatrixXd log_e(t_count, k);
    for (int t = 0; t < t_count; ++t) {
        log_e.row(t) =
            emission_log_diag(params.emissions, data, t, spec.space, spec.coupling).transpose();
    }
    return log_e;
}

double forward_loglik(const Eigen::MatrixXd& tpm, const Eigen::VectorXd& delta,
                      const Eigen::MatrixXd& log_emissions) {
    const Eigen::Index t_count = log_emissions.rows();
    const Eigen::Index k = log_emissions.cols();
    if (t_count < 1) throw DataError("forward_loglik: empty series");
    if (tpm.rows() != k || delta.size() != k) {
        throw ConfigError("forward_loglik: dimension mismatch");
    }
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();

    auto check_column = [&](Eigen::Index t, const Eigen::VectorXd& alpha) {
        double max = neg_inf;
        for (Eigen::Index i = 0; i < k; ++i) {
            const double v = alpha(i);
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
                throw NumericalError("non-finite emission density at t=" + std::to_string(t));
            }
            max = std::max(max, v);
        }
        if (max == neg_inf) {
            throw NumericalError("all states have zero density at t=" + std::to_string(t) +
                                 " (model/data mismatch)");
        }
        return max;
    };

    Eigen::VectorXd alpha = delta.array().log() + log_emissions.row(0).transpose().array();
    double shift = check_column(0, alpha);
    double loglik = 0.0;
    Eigen::VectorXd scaled(k);

    for (Eigen::Index t = 1; t < t_count; ++t) {
        // One shared log-sum-exp shift per step keeps the recursion exact.
        scaled = (alpha.array() - shift).exp();
        alpha = (tpm.transpose() * scaled).array().log() + shift +
                log_emissions.row(t).transpose().array();
        shift = check_column(t, alpha);
    }
    // Final reduction.
    loglik = shift + std::log((alpha.array() - shift).exp().sum());
    if (!std::isfinite(loglik)) {
        throw NumericalError("forward recursion produced a non-finite log-likelihood");
    }
    return loglik;
}

double log_likelihood(const ModelSpec& spec, const NaturalParams& params,
                      const ObservationSet& data) {
    const Eigen::MatrixXd tpm = model_tpm(spec, params);
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    return forward_loglik(tpm, delta, log_emission_matrix(spec, params, data));
}

double log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& working,
                      const ObservationSet& data) {
    return log_likelihood(spec, unpack_working(spec, working), data);
}

} // namespace chmm
