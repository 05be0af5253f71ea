#pragma once

#include <vector>

#include <Eigen/Dense>

#include "chmm/model.hpp"

namespace chmm {

/// Decoded state sequence with per-chain components and smoothed
/// posterior probabilities.
struct StatePath {
    Eigen::VectorXi global_path;  // length T, 0-based running-state indices
    Eigen::MatrixXi per_chain;    // T x M, 1-based chain states
    Eigen::MatrixXd posteriors;   // T x K, rows sum to 1
};

/// Global decoding: argmax over state sequences of the joint
/// log-probability, ties broken toward the lower state index.
Eigen::VectorXi viterbi(const ModelSpec& spec, const NaturalParams& params,
                        const ObservationSet& data);

struct LocalDecodeResult {
    Eigen::MatrixXd posteriors; // T x K smoothing probabilities
    Eigen::VectorXi path;       // per-t argmax (0-based)
};

/// Forward-backward smoothing probabilities Pr(S_t = k | y_1..y_T), in
/// log space with per-step normalisation.
LocalDecodeResult local_decode(const ModelSpec& spec, const NaturalParams& params,
                               const ObservationSet& data);

/// Viterbi path plus posteriors, with per-chain components filled in.
StatePath decode(const ModelSpec& spec, const NaturalParams& params, const ObservationSet& data);

/// 1-based per-chain components of a running-state path.
Eigen::MatrixXi per_chain_states(const ModelSpec& spec, const Eigen::VectorXi& global_path);

/// 100 * (# mismatched chain-state entries) / (T*M).
double decoding_error(const Eigen::MatrixXi& decoded, const Eigen::MatrixXi& truth);

/// 100 * (# time points whose full state vector is wrong) / T — the
/// metric behind the study's "falsely decoded states" comparison.
double vector_decoding_error(const Eigen::MatrixXi& decoded, const Eigen::MatrixXi& truth);

struct Disagreement {
    std::vector<int> indices; // time points where the chains are not all equal
    double fraction = 0.0;
};

/// Time indices with not-all-equal chain states. Requires M >= 2.
Disagreement disagreement_intervals(const Eigen::MatrixXi& per_chain);

} // namespace chmm
