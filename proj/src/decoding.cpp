#include "chmm/decoding.hpp"

#include <cmath>
#include <limits>

#include "chmm/likelihood.hpp"
#include "chmm/transition.hpp"

namespace chmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const Eigen::VectorXd& v) {
    const double max = v.maxCoeff();
    if (max == kNegInf) return kNegInf;
    return max + std::log((v.array() - max).exp().sum());
}

} // namespace

Eigen::VectorXi viterbi(const ModelSpec& spec, const NaturalParams& params,
                        const ObservationSet& data) {
    const Eigen::MatrixXd tpm = model_tpm(spec, params);
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    const Eigen::MatrixXd log_e = log_emission_matrix(spec, params, data);
    const int t_count = data.T();
    const int k = spec.run_dim();
    const Eigen::MatrixXd log_tpm = tpm.array().max(0.0).log();

    Eigen::MatrixXd score(t_count, k);
    Eigen::MatrixXi back(t_count, k);
    score.row(0) = delta.array().log().transpose() + log_e.row(0).array();

    for (int t = 1; t < t_count; ++t) {
        for (int j = 0; j < k; ++j) {
            double best = kNegInf;
            int arg = 0;
            for (int i = 0; i < k; ++i) {
                const double v = score(t - 1, i) + log_tpm(i, j);
                if (v > best) { // strict: ties stay at the lower index
                    best = v;
                    arg = i;
                }
            }
            score(t, j) = best + log_e(t, j);
            back(t, j) = arg;
        }
    }

    Eigen::VectorXi path(t_count);
    double best = kNegInf;
    int arg = 0;
    for (int j = 0; j < k; ++j) {
        if (score(t_count - 1, j) > best) {
            best = score(t_count - 1, j);
            arg = j;
        }
    }
    if (best == kNegInf) {
        throw NumericalError("viterbi: all state sequences have zero probability");
    }
    path(t_count - 1) = arg;
    for (int t = t_count - 1; t > 0; --t) path(t - 1) = back(t, path(t));
    return path;
}

LocalDecodeResult local_decode(const ModelSpec& spec, const NaturalParams& params,
                               const ObservationSet& data) {
    const Eigen::MatrixXd tpm = model_tpm(spec, params);
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    const Eigen::MatrixXd log_e = log_emission_matrix(spec, params, data);
    const int t_count = data.T();
    const int k = spec.run_dim();
    const Eigen::MatrixXd log_tpm = tpm.array().max(0.0).log();

    // Log-space forward and backward passes, normalised per step to keep
    // magnitudes bounded at long T.
    Eigen::MatrixXd log_alpha(t_count, k);
    log_alpha.row(0) = delta.array().log().transpose() + log_e.row(0).array();
    for (int t = 1; t < t_count; ++t) {
        for (int j = 0; j < k; ++j) {
            Eigen::VectorXd terms = log_alpha.row(t - 1).transpose() + log_tpm.col(j);
            log_alpha(t, j) = logsumexp(terms) + log_e(t, j);
        }
        const double norm = logsumexp(log_alpha.row(t).transpose());
        if (norm == kNegInf) {
            throw NumericalError("local_decode: zero forward mass at t=" + std::to_string(t));
        }
        log_alpha.row(t).array() -= norm;
    }

    Eigen::MatrixXd log_beta = Eigen::MatrixXd::Zero(t_count, k);
    for (int t = t_count - 2; t >= 0; --t) {
        for (int i = 0; i < k; ++i) {
            Eigen::VectorXd terms = log_tpm.row(i).transpose() +
                                    log_e.row(t + 1).transpose() +
                                    log_beta.row(t + 1).transpose();
            log_beta(t, i) = logsumexp(terms);
        }
        const double norm = logsumexp(log_beta.row(t).transpose());
        log_beta.row(t).array() -= norm;
    }

    LocalDecodeResult result;
    result.posteriors.resize(t_count, k);
    result.path.resize(t_count);
    for (int t = 0; t < t_count; ++t) {
        Eigen::VectorXd log_post = log_alpha.row(t).transpose() + log_beta.row(t).transpose();
        const double norm = logsumexp(log_post);
        result.posteriors.row(t) = (log_post.array() - norm).exp().transpose();
        int arg = 0;
        for (int j = 1; j < k; ++j) {
            if (result.posteriors(t, j) > result.posteriors(t, arg)) arg = j;
        }
        result.path(t) = arg;
    }
    return result;
}

Eigen::MatrixXi per_chain_states(const ModelSpec& spec, const Eigen::VectorXi& global_path) {
    const int t_count = static_cast<int>(global_path.size());
    const int m_count = spec.space.num_chains;
    Eigen::MatrixXi per_chain(t_count, m_count);
    for (int t = 0; t < t_count; ++t) {
        for (int m = 0; m < m_count; ++m) {
            per_chain(t, m) = spec.chain_state0(global_path(t), m) + 1;
        }
    }
    return per_chain;
}

StatePath decode(const ModelSpec& spec, const NaturalParams& params, const ObservationSet& data) {
    StatePath path;
    path.global_path = viterbi(spec, params, data);
    path.per_chain = per_chain_states(spec, path.global_path);
    path.posteriors = local_decode(spec, params, data).posteriors;
    return path;
}

double decoding_error(const Eigen::MatrixXi& decoded, const Eigen::MatrixXi& truth) {
    if (decoded.rows() != truth.rows() || decoded.cols() != truth.cols()) {
        throw DataError("decoding_error: path shapes differ");
    }
    if (decoded.size() == 0) throw DataError("decoding_error: empty paths");
    const auto mismatches = (decoded.array() != truth.array()).count();
    return 100.0 * static_cast<double>(mismatches) / static_cast<double>(decoded.size());
}

double vector_decoding_error(const Eigen::MatrixXi& decoded, const Eigen::MatrixXi& truth) {
    if (decoded.rows() != truth.rows() || decoded.cols() != truth.cols()) {
        throw DataError("vector_decoding_error: path shapes differ");
    }
    if (decoded.rows() == 0) throw DataError("vector_decoding_error: empty paths");
    int bad = 0;
    for (Eigen::Index t = 0; t < decoded.rows(); ++t) {
        if ((decoded.row(t).array() != truth.row(t).array()).any()) ++bad;
    }
    return 100.0 * bad / static_cast<double>(decoded.rows());
}

Disagreement disagreement_intervals(const Eigen::MatrixXi& per_chain) {
    if (per_chain.cols() < 2) {
        throw DataError("disagreement_intervals: requires at least two chains");
    }
    Disagreement out;
    for (Eigen::Index t = 0; t < per_chain.rows(); ++t) {
        bool all_equal = true;
        for (Eigen::Index m = 1; m < per_chain.cols(); ++m) {
            if (per_chain(t, m) != per_chain(t, 0)) {
                all_equal = false;
                break;
            }
        }
        if (!all_equal) out.indices.push_back(static_cast<int>(t));
    }
    out.fraction = per_chain.rows() > 0
                       ? static_cast<double>(out.indices.size()) /
                             static_cast<double>(per_chain.rows())
                       : 0.0;
    return out;
}

} // namespace chmm
