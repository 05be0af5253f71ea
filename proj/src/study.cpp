#include "chmm/study.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "chmm/decoding.hpp"

namespace chmm {

namespace {

Replication run_replication(const SimConfig& config, int rep) {
    Replication out;
    out.index = rep;
    const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));

    const SimulatedData sim =
        simulate(config.truth_spec, config.truth, config.t_train + config.t_test, rep_seed);
    const ObservationSet train = sim.obs.rows(0, config.t_train);
    const ObservationSet test = sim.obs.rows(config.t_train, config.t_test);
    const Eigen::MatrixXi truth_train = sim.chain_states.topRows(config.t_train);
    const Eigen::MatrixXi truth_test = sim.chain_states.bottomRows(config.t_test);

    out.per_spec.resize(config.competitors.size());
    out.kept = true;
    for (std::size_t s = 0; s < config.competitors.size(); ++s) {
        const auto& competitor = config.competitors[s];
        FitOptions options;
        options.restarts = config.restarts;
        options.seed = derive_seed(rep_seed, 1000 + s);
        options.max_iter = config.max_iter;
        options.compute_std_errors = false;
        FitResult fit_result;
        try {
            fit_result = fit(competitor.spec, train, options);
        } catch (const std::exception& e) {
            out.kept = false;
            out.failure = competitor.name + ": " + e.what();
            return out;
        }

        RepSpecResult& r = out.per_spec[s];
        r.loglik = fit_result.loglik;
        r.aic = fit_result.aic;
        const Eigen::MatrixXi decoded_train = per_chain_states(
            competitor.spec, viterbi(competitor.spec, fit_result.natural, train));
        const Eigen::MatrixXi decoded_test = per_chain_states(
            competitor.spec, viterbi(competitor.spec, fit_result.natural, test));
        r.train_error = vector_decoding_error(decoded_train, truth_train);
        r.test_error = vector_decoding_error(decoded_test, truth_test);
        r.forecast = forecast_score(competitor.spec, fit_result.natural, train, test);
        for (const auto& chain : fit_result.natural.emissions) {
            for (const auto& em : chain) r.emission_locations.push_back(em.location());
        }
    }

    out.winner = 0;
    for (std::size_t s = 1; s < out.per_spec.size(); ++s) {
        if (out.per_spec[s].forecast > out.per_spec[out.winner].forecast) {
            out.winner = static_cast<int>(s);
        }
    }
    return out;
}

} // namespace

SimReport run_study(const SimConfig& config) {
    if (config.t_train < 1 || config.t_test < 1 || config.replications < 1) {
        throw ConfigError("run_study: T_train, T_test and replications must be >= 1");
    }
    if (config.competitors.empty()) throw ConfigError("run_study: no competing specs");

    SimReport report;
    for (const auto& c : config.competitors) report.spec_names.push_back(c.name);
    report.replications.resize(config.replications);

    if (config.threads > 1 && config.replications > 1) {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        const int thread_count = std::min(config.threads, config.replications);
        for (int w = 0; w < thread_count; ++w) {
            workers.emplace_back([&] {
                for (int r = next.fetch_add(1); r < config.replications;
                     r = next.fetch_add(1)) {
                    report.replications[r] = run_replication(config, r);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    } else {
        for (int r = 0; r < config.replications; ++r) {
            report.replications[r] = run_replication(config, r);
        }
    }

    const std::size_t spec_count = config.competitors.size();
    report.mean_train_error.assign(spec_count, 0.0);
    report.mean_test_error.assign(spec_count, 0.0);
    report.mean_aic.assign(spec_count, 0.0);
    report.win_rate.assign(spec_count, 0.0);
    report.mean_emission_locations.assign(spec_count, {});

    for (const auto& rep : report.replications) {
        if (!rep.kept) {
            ++report.dropped;
            continue;
        }
        ++report.kept;
        for (std::size_t s = 0; s < spec_count; ++s) {
            report.mean_train_error[s] += rep.per_spec[s].train_error;
            report.mean_test_error[s] += rep.per_spec[s].test_error;
            report.mean_aic[s] += rep.per_spec[s].aic;
            if (report.mean_emission_locations[s].empty()) {
                report.mean_emission_locations[s].assign(
                    rep.per_spec[s].emission_locations.size(), 0.0);
            }
            for (std::size_t j = 0; j < rep.per_spec[s].emission_locations.size(); ++j) {
                report.mean_emission_locations[s][j] += rep.per_spec[s].emission_locations[j];
            }
        }
        report.win_rate[rep.winner] += 1.0;
    }
    if (report.kept == 0) throw NumericalError("run_study: every replication failed to fit");
    for (std::size_t s = 0; s < spec_count; ++s) {
        report.mean_train_error[s] /= report.kept;
        report.mean_test_error[s] /= report.kept;
        report.mean_aic[s] /= report.kept;
        report.win_rate[s] /= report.kept;
        for (auto& v : report.mean_emission_locations[s]) v /= report.kept;
    }
    return report;
}

std::string summarize(const SimReport& report) {
    std::ostringstream out;
    out << "replications kept: " << report.kept << " (dropped " << report.dropped << ")\n\n";
    out << "average percentage of falsely decoded states in the Viterbi sequence\n";
    out << "data set";
    for (const auto& name : report.spec_names) out << "\t" << name;
    out << "\n";
    out << "training data set";
    for (double v : report.mean_train_error) out << "\t" << v;
    out << "\n";
    out << "test data set";
    for (double v : report.mean_test_error) out << "\t" << v;
    out << "\n\nforecast win rate";
    for (double v : report.win_rate) out << "\t" << v;
    out << "\n\nmean AIC";
    for (double v : report.mean_aic) out << "\t" << v;
    out << "\n";
    return out.str();
}

} // namespace chmm
