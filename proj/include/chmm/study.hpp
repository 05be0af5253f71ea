#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chmm/fit.hpp"
#include "chmm/simulate.hpp"

namespace chmm {

struct CompetingSpec {
    std::string name;
    ModelSpec spec;
};

/// Configuration for a misspecification study: simulate from `truth`,
/// fit every competing spec, and compare decoding and forecasting.
struct SimConfig {
    ModelSpec truth_spec;
    NaturalParams truth;
    int t_train = 1000;
    int t_test = 100;
    int replications = 100;
    std::uint64_t seed = 1;
    std::vector<CompetingSpec> competitors;
    int restarts = 5;
    int max_iter = 500;
    int threads = 1;
};

struct RepSpecResult {
    double loglik = 0.0;
    double aic = 0.0;
    double train_error = 0.0;    // percent falsely decoded chain states
    double test_error = 0.0;
    double forecast = 0.0;       // conditional test log-likelihood
    std::vector<double> emission_locations; // [chain][state], row-major
};

struct Replication {
    int index = 0;
    bool kept = false;        // dropped if any competing spec failed to fit
    int winner = -1;          // index of the spec with the largest forecast
    std::vector<RepSpecResult> per_spec;
    std::string failure;
};

struct SimReport {
    std::vector<std::string> spec_names;
    std::vector<Replication> replications;
    int kept = 0;
    int dropped = 0;
    std::vector<double> mean_train_error; // per spec, over kept replications
    std::vector<double> mean_test_error;
    std::vector<double> mean_aic;
    std::vector<double> win_rate;         // sums to 1, ties to the earliest spec
    std::vector<std::vector<double>> mean_emission_locations; // per spec
};

/// Runs the full simulate/fit/decode/forecast loop, deterministic given
/// the master seed. Replications where any spec fails all restarts are
/// dropped from the aggregates for all specs.
SimReport run_study(const SimConfig& config);

/// Table-style text summary of the aggregates.
std::string summarize(const SimReport& report);

} // namespace chmm
