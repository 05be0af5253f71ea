// chmm: coupled hidden Markov model fitting, decoding, simulation,
// forecasting, model selection, and misspecification studies.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "chmm/csv.hpp"
#include "chmm/decoding.hpp"
#include "chmm/errors.hpp"
#include "chmm/fit.hpp"
#include "chmm/report.hpp"
#include "chmm/serialize.hpp"
#include "chmm/simulate.hpp"
#include "chmm/study.hpp"

namespace fs = std::filesystem;
using namespace chmm;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> restarts;
    std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
    auto* opt = cmd->add_option("-c,--config", flags.config_path, "Run configuration JSON file");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "Master RNG seed (overrides config)");
    cmd->add_option("--threads", flags.threads, "Worker threads (default: available cores)");
    cmd->add_option("--restarts", flags.restarts, "Randomized fit restarts (overrides config)");
    cmd->add_option("--out", flags.out_dir, "Output directory (overrides config)");
}

RunConfig load_config_with_overrides(const CommonFlags& flags) {
    RunConfig config = load_run_config(flags.config_path);
    if (flags.seed) config.fit_options.seed = *flags.seed;
    if (flags.restarts) config.fit_options.restarts = *flags.restarts;
    if (flags.out_dir) config.out_dir = *flags.out_dir;
    config.fit_options.threads =
        flags.threads ? *flags.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    config.data.seed = config.fit_options.seed;
    return config;
}

fs::path prepare_out_dir(const RunConfig& config) {
    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + config.out_dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    out << text;
}

/// Shared density grid spanning the data (padded), or the open unit
/// interval when every chain is beta-distributed.
Eigen::VectorXd default_grid(const ModelSpec& spec, const ObservationSet& data) {
    bool all_beta = true;
    for (auto f : spec.families) all_beta &= f == EmissionFamily::Beta;
    double lo, hi;
    if (all_beta) {
        lo = 1e-3;
        hi = 1.0 - 1e-3;
    } else {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (int t = 0; t < data.T(); ++t) {
            for (int m = 0; m < data.M(); ++m) {
                if (data.missing(t, m)) continue;
                lo = std::min(lo, data.y(t, m));
                hi = std::max(hi, data.y(t, m));
            }
        }
        const double pad = 0.1 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return Eigen::VectorXd::LinSpaced(201, lo, hi);
}

void write_decode_outputs(const fs::path& dir, const ModelSpec& spec, const StatePath& path) {
    std::vector<std::string> header = {"t", "global_state"};
    for (int m = 0; m < spec.space.num_chains; ++m) {
        header.push_back("chain" + std::to_string(m + 1) + "_state");
    }
    for (int k = 0; k < spec.run_dim(); ++k) header.push_back("posterior_" + std::to_string(k));
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < path.global_path.size(); ++t) {
        std::vector<double> row = {static_cast<double>(t + 1),
                                   static_cast<double>(path.global_path(t))};
        for (int m = 0; m < spec.space.num_chains; ++m) {
            row.push_back(static_cast<double>(path.per_chain(t, m)));
        }
        for (int k = 0; k < spec.run_dim(); ++k) row.push_back(path.posteriors(t, k));
        rows.push_back(std::move(row));
    }
    write_csv((dir / "decoded_states.csv").string(), header, rows);

    std::string summary;
    if (spec.space.num_chains >= 2) {
        const Disagreement d = disagreement_intervals(path.per_chain);
        summary = "disagreement_fraction=" + format_double(d.fraction) +
                  "\ndisagreement_count=" + std::to_string(d.indices.size()) + "\n";
    } else {
        summary = "disagreement_fraction=0\ndisagreement_count=0\n";
    }
    write_text(dir / "disagreement.txt", summary);
    std::cout << summary;
}

int run_fit(const CommonFlags& flags) {
    const RunConfig config = load_config_with_overrides(flags);
    const fs::path dir = prepare_out_dir(config);
    const ObservationSet data = ingest_csv(config.data);

    const FitResult result = fit(config.model, data, config.fit_options);
    save_model((dir / "model.json").string(), config.model, result.natural);

    const std::string report = fit_report(result, config.fit_options);
    write_text(dir / "fit_report.txt", report);
    write_density_grid_csv((dir / "density_grid.csv").string(),
                           density_grid(config.model, result.natural,
                                        default_grid(config.model, data)));
    std::cout << report;
    return 0;
}

int run_decode(const CommonFlags& flags, const std::string& model_path) {
    const RunConfig config = load_config_with_overrides(flags);
    const fs::path dir = prepare_out_dir(config);
    const std::string resolved =
        model_path.empty() ? (dir / "model.json").string() : model_path;
    const LoadedModel model = load_model(resolved);
    RunConfig data_config = config;
    data_config.data.families = model.spec.families;
    const ObservationSet data = ingest_csv(data_config.data);

    const StatePath path = decode(model.spec, model.params, data);
    write_decode_outputs(dir, model.spec, path);
    return 0;
}

int run_simulate(const CommonFlags& flags, const std::string& model_path, int length) {
    const RunConfig config = load_config_with_overrides(flags);
    const fs::path dir = prepare_out_dir(config);
    const std::string resolved =
        model_path.empty() ? (dir / "model.json").string() : model_path;
    const LoadedModel model = load_model(resolved);

    std::vector<Eigen::MatrixXd> covariates;
    int t_count = length;
    bool needs_covariates = false;
    for (int p : model.spec.covariate_counts) needs_covariates |= p > 0;
    if (needs_covariates) {
        if (config.data.path.empty()) {
            throw ConfigError("simulate: regression chains need a data block with covariates");
        }
        RunConfig data_config = config;
        data_config.data.families = model.spec.families;
        const ObservationSet real = ingest_csv(data_config.data);
        covariates = real.covariates;
        t_count = real.T();
    }
    if (t_count < 1) throw ConfigError("simulate: provide --length >= 1");

    const SimulatedData sim =
        simulate(model.spec, model.params, t_count, config.fit_options.seed, covariates);

    std::vector<std::string> obs_header = {"t"};
    for (int m = 0; m < sim.obs.M(); ++m) obs_header.push_back("y" + std::to_string(m + 1));
    std::vector<std::vector<double>> obs_rows;
    for (int t = 0; t < sim.obs.T(); ++t) {
        std::vector<double> row = {static_cast<double>(t + 1)};
        for (int m = 0; m < sim.obs.M(); ++m) row.push_back(sim.obs.y(t, m));
        obs_rows.push_back(std::move(row));
    }
    write_csv((dir / "simulated_observations.csv").string(), obs_header, obs_rows);

    std::vector<std::string> state_header = {"t", "product_state"};
    for (int m = 0; m < sim.obs.M(); ++m) {
        state_header.push_back("chain" + std::to_string(m + 1) + "_state");
    }
    std::vector<std::vector<double>> state_rows;
    for (int t = 0; t < sim.obs.T(); ++t) {
        std::vector<double> row = {static_cast<double>(t + 1),
                                   static_cast<double>(sim.product_states(t))};
        for (int m = 0; m < sim.obs.M(); ++m) {
            row.push_back(static_cast<double>(sim.chain_states(t, m)));
        }
        state_rows.push_back(std::move(row));
    }
    write_csv((dir / "simulated_states.csv").string(), state_header, state_rows);
    std::cout << "simulated T=" << sim.obs.T() << " M=" << sim.obs.M() << " into "
              << dir.string() << "\n";
    return 0;
}

int run_forecast(const CommonFlags& flags, const std::string& model_path, int split) {
    const RunConfig config = load_config_with_overrides(flags);
    const fs::path dir = prepare_out_dir(config);
    const std::string resolved =
        model_path.empty() ? (dir / "model.json").string() : model_path;
    const LoadedModel model = load_model(resolved);
    RunConfig data_config = config;
    data_config.data.families = model.spec.families;
    const ObservationSet data = ingest_csv(data_config.data);
    if (split < 1 || split >= data.T()) {
        throw ConfigError("forecast: --split must cut the series into nonempty train and test");
    }

    const ObservationSet train = data.rows(0, split);
    const ObservationSet test = data.rows(split, data.T() - split);
    const double score = forecast_score(model.spec, model.params, train, test);
    const std::string line = "forecast_loglik=" + format_double(score) +
                             "\ntrain_rows=" + std::to_string(split) +
                             "\ntest_rows=" + std::to_string(data.T() - split) + "\n";
    write_text(dir / "forecast.txt", line);
    std::cout << line;
    return 0;
}

int run_simstudy(const CommonFlags& flags) {
    const RunConfig config = load_config_with_overrides(flags);
    if (!config.has_study) throw ConfigError("config has no simstudy block");
    const fs::path dir = prepare_out_dir(config);

    const LoadedModel truth = config.truth_model_path.empty()
                                  ? load_model_from_string(config.truth_inline_json)
                                  : load_model(config.truth_model_path);

    SimConfig study;
    study.truth_spec = truth.spec;
    study.truth = truth.params;
    study.t_train = config.study_t_train;
    study.t_test = config.study_t_test;
    study.replications = config.study_replications;
    study.restarts = config.study_restarts;
    study.seed = config.fit_options.seed;
    study.max_iter = config.fit_options.max_iter;
    study.threads = config.fit_options.threads;
    for (const auto& name : config.study_competitors) {
        ModelSpec spec = truth.spec;
        spec.coupling = coupling_from_string(name);
        study.competitors.push_back({name, spec});
    }

    const SimReport report = run_study(study);

    std::vector<std::string> header = {"replication", "kept", "spec",    "loglik",
                                       "aic",         "train_error", "test_error", "forecast"};
    std::vector<std::vector<double>> rows;
    for (const auto& rep : report.replications) {
        if (!rep.kept) continue;
        for (std::size_t s = 0; s < report.spec_names.size(); ++s) {
            rows.push_back({static_cast<double>(rep.index), 1.0, static_cast<double>(s),
                            rep.per_spec[s].loglik, rep.per_spec[s].aic,
                            rep.per_spec[s].train_error, rep.per_spec[s].test_error,
                            rep.per_spec[s].forecast});
        }
    }
    write_csv((dir / "simstudy_replications.csv").string(), header, rows);

    std::string summary = summarize(report);
    summary += "\nspec index legend:\n";
    for (std::size_t s = 0; s < report.spec_names.size(); ++s) {
        summary += "  " + std::to_string(s) + " = " + report.spec_names[s] + "\n";
    }
    write_text(dir / "simstudy_summary.txt", summary);
    std::cout << summary;
    return 0;
}

int run_select(const CommonFlags& flags) {
    const RunConfig config = load_config_with_overrides(flags);
    const fs::path dir = prepare_out_dir(config);
    const ObservationSet data = ingest_csv(config.data);

    const std::vector<CouplingKind> kinds = {
        CouplingKind::CartesianFull, CouplingKind::CondIndep, CouplingKind::MixtureWeight,
        CouplingKind::IndependentChains, CouplingKind::SingleChain};

    FitOptions options = config.fit_options;
    options.compute_std_errors = false;
    std::vector<FitResult> results;
    std::vector<std::string> names;
    for (CouplingKind kind : kinds) {
        ModelSpec spec = config.model;
        spec.coupling = kind;
        results.push_back(fit(spec, data, options));
        names.push_back(to_string(kind));
    }

    const std::vector<int> order = compare_models(results);
    std::string table = "rank,coupling,free_params,loglik,aic\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const FitResult& res = results[order[r]];
        table += std::to_string(r + 1) + "," + names[order[r]] + "," +
                 std::to_string(res.spec.free_param_count()) + "," +
                 format_double(res.loglik) + "," + format_double(res.aic) + "\n";
    }
    write_text(dir / "selection.csv", table);
    std::cout << table;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled hidden Markov models: fit, decode, simulate, forecast, "
                 "simstudy, select"};
    app.require_subcommand(1);

    CommonFlags fit_flags, decode_flags, sim_flags, fc_flags, study_flags, select_flags;
    std::string decode_model, sim_model, fc_model;
    int sim_length = 0;
    int fc_split = 0;

    auto* fit_cmd = app.add_subcommand("fit", "Maximum likelihood fit; writes model + report");
    add_common_flags(fit_cmd, fit_flags);

    auto* decode_cmd =
        app.add_subcommand("decode", "Viterbi + local decoding with a saved model");
    add_common_flags(decode_cmd, decode_flags);
    decode_cmd->add_option("--model", decode_model, "Model JSON (default: <out>/model.json)");

    auto* sim_cmd = app.add_subcommand("simulate", "Sample observations and true states");
    add_common_flags(sim_cmd, sim_flags);
    sim_cmd->add_option("--model", sim_model, "Model JSON (default: <out>/model.json)");
    sim_cmd->add_option("--length", sim_length, "Series length T");

    auto* fc_cmd =
        app.add_subcommand("forecast", "Conditional test log-likelihood after a split");
    add_common_flags(fc_cmd, fc_flags);
    fc_cmd->add_option("--model", fc_model, "Model JSON (default: <out>/model.json)");
    fc_cmd->add_option("--split", fc_split, "Training rows before the forecast window")
        ->required();

    auto* study_cmd =
        app.add_subcommand("simstudy", "Monte Carlo misspecification study from config");
    add_common_flags(study_cmd, study_flags);

    auto* select_cmd =
        app.add_subcommand("select", "AIC ranking across all five coupling kinds");
    add_common_flags(select_cmd, select_flags);

    try {
        app.parse(argc, argv);
        if (fit_cmd->parsed()) return run_fit(fit_flags);
        if (decode_cmd->parsed()) return run_decode(decode_flags, decode_model);
        if (sim_cmd->parsed()) return run_simulate(sim_flags, sim_model, sim_length);
        if (fc_cmd->parsed()) return run_forecast(fc_flags, fc_model, fc_split);
        if (study_cmd->parsed()) return run_simstudy(study_flags);
        if (select_cmd->parsed()) return run_select(select_flags);
        return 1;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "error type=usage msg=\"" << e.what() << "\"\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error type=config msg=\"" << e.what() << "\"\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error type=data msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error type=numerical msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error type=internal msg=\"" << e.what() << "\"\n";
        return 3;
    }
}
