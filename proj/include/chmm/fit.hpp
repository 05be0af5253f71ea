#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chmm/likelihood.hpp"
#include "chmm/model.hpp"

namespace chmm {

struct FitOptions {
    int restarts = 10;
    std::uint64_t seed = 1;
    double tolerance = 1e-6; // gradient infinity norm on the working scale
    int max_iter = 500;
    int threads = 1;
    bool compute_std_errors = true;
    // When set, restart 0 starts here instead of at a randomized point.
    std::optional<Eigen::VectorXd> initial_working;
};

struct RestartRecord {
    std::uint64_t seed = 0;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string message;
};

struct FitResult {
    ModelSpec spec;
    Eigen::VectorXd working;  // at the optimum, after state reordering
    NaturalParams natural;
    double loglik = 0.0;
    double aic = 0.0;
    std::optional<Eigen::VectorXd> std_errors; // aligned with flatten_natural
    std::string se_warning;
    std::vector<RestartRecord> restarts;
    bool weights_degenerate = false; // MixtureWeight off-diagonal weight < 1e-6
    std::uint64_t data_fingerprint = 0;
};

/// Content hash of an observation set, used to guard model comparisons.
std::uint64_t data_fingerprint(const ObservationSet& data);

/// Deterministic per-index substream seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Randomized starting parameters: diagonal transition mass U(0.7, 0.95),
/// emission locations at data quantiles (jittered for restart > 0).
NaturalParams random_start(const ModelSpec& spec, const ObservationSet& data,
                           std::uint64_t seed, bool jitter);

/// Maximum likelihood fit over working parameters with R randomized
/// restarts. Throws NumericalError (with restart diagnostics) when no
/// restart converges.
FitResult fit(const ModelSpec& spec, const ObservationSet& data, const FitOptions& options = {});

/// Delta-method standard errors on the natural scale from the inverse of
/// the negative numerical Hessian at the optimum. Returns absent (with a
/// warning stored on the result) when the Hessian is not positive
/// definite.
std::optional<Eigen::VectorXd> standard_errors(FitResult& result, const ObservationSet& data);

double aic(const FitResult& result);

/// Indices of results in ascending AIC order. Throws ConfigError if the
/// results were not fitted on identical data.
std::vector<int> compare_models(const std::vector<FitResult>& results);

} // namespace chmm
