#pragma once

// Test-only reference implementations, kept independent of the library's
// forward/Viterbi code paths.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "chmm/model.hpp"

namespace oracle {

inline double logsumexp(const std::vector<double>& v) {
    double max = -std::numeric_limits<double>::infinity();
    for (double x : v) max = std::max(max, x);
    if (max == -std::numeric_limits<double>::infinity()) return max;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - max);
    return max + std::log(sum);
}

// Enumerates all K^T state sequences and log-sums their joint densities.
inline double enum_loglik(const Eigen::MatrixXd& tpm, const Eigen::VectorXd& delta,
                          const Eigen::MatrixXd& log_e) {
    const int t_count = static_cast<int>(log_e.rows());
    const int k = static_cast<int>(log_e.cols());
    std::vector<double> terms;
    std::vector<int> seq(t_count, 0);
    while (true) {
        double lp = std::log(delta(seq[0])) + log_e(0, seq[0]);
        for (int t = 1; t < t_count; ++t) {
            lp += std::log(tpm(seq[t - 1], seq[t])) + log_e(t, seq[t]);
        }
        terms.push_back(lp);
        int pos = t_count - 1;
        while (pos >= 0 && ++seq[pos] == k) seq[pos--] = 0;
        if (pos < 0) break;
    }
    return logsumexp(terms);
}

// Brute-force most probable sequence, scanning sequences in lexicographic
// order and keeping the strictly best one.
inline Eigen::VectorXi enum_viterbi(const Eigen::MatrixXd& tpm, const Eigen::VectorXd& delta,
                                    const Eigen::MatrixXd& log_e) {
    const int t_count = static_cast<int>(log_e.rows());
    const int k = static_cast<int>(log_e.cols());
    std::vector<int> seq(t_count, 0);
    std::vector<int> best_seq;
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        double lp = std::log(delta(seq[0])) + log_e(0, seq[0]);
        for (int t = 1; t < t_count; ++t) {
            lp += std::log(tpm(seq[t - 1], seq[t])) + log_e(t, seq[t]);
        }
        if (lp > best) {
            best = lp;
            best_seq = seq;
        }
        int pos = t_count - 1;
        while (pos >= 0 && ++seq[pos] == k) seq[pos--] = 0;
        if (pos < 0) break;
    }
    Eigen::VectorXi out(t_count);
    for (int t = 0; t < t_count; ++t) out(t) = best_seq[t];
    return out;
}

// Smoothing probabilities Pr(S_t = j | y_1..T) by full enumeration.
inline Eigen::MatrixXd enum_posteriors(const Eigen::MatrixXd& tpm, const Eigen::VectorXd& delta,
                                       const Eigen::MatrixXd& log_e) {
    const int t_count = static_cast<int>(log_e.rows());
    const int k = static_cast<int>(log_e.cols());
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(t_count, k);
    std::vector<int> seq(t_count, 0);
    double total = 0.0;
    while (true) {
        double lp = std::log(delta(seq[0])) + log_e(0, seq[0]);
        for (int t = 1; t < t_count; ++t) {
            lp += std::log(tpm(seq[t - 1], seq[t])) + log_e(t, seq[t]);
        }
        const double p = std::exp(lp);
        total += p;
        for (int t = 0; t < t_count; ++t) joint(t, seq[t]) += p;
        int pos = t_count - 1;
        while (pos >= 0 && ++seq[pos] == k) seq[pos--] = 0;
        if (pos < 0) break;
    }
    return joint / total;
}

// Probability-space forward algorithm with per-step scaling constants;
// the classical rescaled reference implementation.
inline double scaled_forward(const Eigen::MatrixXd& tpm, const Eigen::VectorXd& delta,
                             const Eigen::MatrixXd& log_e) {
    const Eigen::Index t_count = log_e.rows();
    Eigen::VectorXd phi = delta.array() * log_e.row(0).transpose().array().exp();
    double loglik = std::log(phi.sum());
    phi /= phi.sum();
    for (Eigen::Index t = 1; t < t_count; ++t) {
        phi = (tpm.transpose() * phi).array() * log_e.row(t).transpose().array().exp();
        const double c = phi.sum();
        loglik += std::log(c);
        phi /= c;
    }
    return loglik;
}

// Random irreducible TPM with substantial diagonal mass.
inline Eigen::MatrixXd random_tpm(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    Eigen::MatrixXd tpm(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) tpm(i, j) = unit(rng) + (i == j ? 1.0 : 0.0);
        tpm.row(i) /= tpm.row(i).sum();
    }
    return tpm;
}

// The 4x4 transition matrix and normal emissions used throughout the
// misspecification experiments (two chains, two states each).
inline Eigen::MatrixXd study_tpm() {
    Eigen::MatrixXd tpm(4, 4);
    tpm << 0.90, 0.02, 0.02, 0.06,
           0.09, 0.80, 0.02, 0.09,
           0.09, 0.02, 0.80, 0.09,
           0.06, 0.02, 0.02, 0.90;
    return tpm;
}

inline chmm::ModelSpec study_truth_spec() {
    chmm::ModelSpec spec;
    spec.space = chmm::StateSpace(2, 2);
    spec.coupling = chmm::CouplingKind::CartesianFull;
    spec.families = {chmm::EmissionFamily::Normal, chmm::EmissionFamily::Normal};
    spec.covariate_counts = {0, 0};
    return spec;
}

inline chmm::NaturalParams study_truth_params(double sigma = 1.5) {
    chmm::NaturalParams truth;
    truth.coupling.kind = chmm::CouplingKind::CartesianFull;
    truth.coupling.cartesian = study_tpm();
    truth.emissions.resize(2);
    auto normal = [&](double mean) {
        chmm::StateEmission em;
        em.family = chmm::EmissionFamily::Normal;
        em.mean = mean;
        em.sigma = sigma;
        return em;
    };
    truth.emissions[0] = {normal(2.0), normal(6.0)};
    truth.emissions[1] = {normal(2.0), normal(5.0)};
    return truth;
}

} // namespace oracle
