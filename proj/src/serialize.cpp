#include "chmm/serialize.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace chmm {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& mat) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw ConfigError("expected a matrix (array of arrays)");
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd mat(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != c) {
            throw ConfigError("ragged matrix rows in JSON");
        }
        for (Eigen::Index j = 0; j < c; ++j) mat(i, j) = rows[i][j].get<double>();
    }
    return mat;
}

json spec_to_json(const ModelSpec& spec) {
    json families = json::array();
    for (auto f : spec.families) families.push_back(to_string(f));
    return json{{"num_chains", spec.space.num_chains},
                {"states_per_chain", spec.space.states_per_chain},
                {"coupling", to_string(spec.coupling)},
                {"families", families},
                {"covariate_counts", spec.covariate_counts}};
}

ModelSpec spec_from_json(const json& j) {
    ModelSpec spec;
    spec.space = StateSpace(j.at("num_chains").get<int>(), j.at("states_per_chain").get<int>());
    spec.coupling = coupling_from_string(j.at("coupling").get<std::string>());
    for (const auto& f : j.at("families")) {
        spec.families.push_back(family_from_string(f.get<std::string>()));
    }
    if (j.contains("covariate_counts")) {
        spec.covariate_counts = j.at("covariate_counts").get<std::vector<int>>();
    } else {
        spec.covariate_counts.assign(spec.families.size(), 0);
    }
    spec.validate();
    return spec;
}

json emission_to_json(const StateEmission& em) {
    json out{{"family", to_string(em.family)}};
    switch (em.family) {
    case EmissionFamily::Normal:
        out["mean"] = em.mean;
        out["sigma"] = em.sigma;
        break;
    case EmissionFamily::Beta:
        out["alpha"] = em.alpha;
        out["beta"] = em.beta;
        break;
    case EmissionFamily::NormalRegression:
        out["coef"] = std::vector<double>(em.coef.data(), em.coef.data() + em.coef.size());
        out["sigma"] = em.sigma;
        break;
    }
    return out;
}

StateEmission emission_from_json(const json& j) {
    StateEmission em;
    em.family = family_from_string(j.at("family").get<std::string>());
    switch (em.family) {
    case EmissionFamily::Normal:
        em.mean = j.at("mean").get<double>();
        em.sigma = j.at("sigma").get<double>();
        break;
    case EmissionFamily::Beta:
        em.alpha = j.at("alpha").get<double>();
        em.beta = j.at("beta").get<double>();
        break;
    case EmissionFamily::NormalRegression: {
        const auto coef = j.at("coef").get<std::vector<double>>();
        em.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(),
                                                    static_cast<Eigen::Index>(coef.size()));
        em.sigma = j.at("sigma").get<double>();
        break;
    }
    }
    return em;
}

json params_to_json(const ModelSpec& spec, const NaturalParams& params) {
    json out;
    switch (spec.coupling) {
    case CouplingKind::CartesianFull:
        out["cartesian"] = matrix_to_json(params.coupling.cartesian);
        break;
    case CouplingKind::CondIndep: {
        json blocks = json::array();
        for (const auto& m : params.coupling.cond_marginals) blocks.push_back(matrix_to_json(m));
        out["cond_marginals"] = std::move(blocks);
        break;
    }
    case CouplingKind::MixtureWeight: {
        json pairs = json::array();
        for (const auto& row : params.coupling.pair_tpms) {
            json inner = json::array();
            for (const auto& m : row) inner.push_back(matrix_to_json(m));
            pairs.push_back(std::move(inner));
        }
        out["pair_tpms"] = std::move(pairs);
        out["mixture_weights"] = matrix_to_json(params.coupling.mixture_weights);
        break;
    }
    case CouplingKind::IndependentChains:
    case CouplingKind::SingleChain: {
        json blocks = json::array();
        for (const auto& m : params.coupling.chain_tpms) blocks.push_back(matrix_to_json(m));
        out["chain_tpms"] = std::move(blocks);
        break;
    }
    }
    json emissions = json::array();
    for (const auto& chain : params.emissions) {
        json states = json::array();
        for (const auto& em : chain) states.push_back(emission_to_json(em));
        emissions.push_back(std::move(states));
    }
    out["emissions"] = std::move(emissions);
    return out;
}

NaturalParams params_from_json(const ModelSpec& spec, const json& j) {
    NaturalParams params;
    params.coupling.kind = spec.coupling;
    switch (spec.coupling) {
    case CouplingKind::CartesianFull:
        params.coupling.cartesian = matrix_from_json(j.at("cartesian"));
        break;
    case CouplingKind::CondIndep:
        for (const auto& block : j.at("cond_marginals")) {
            params.coupling.cond_marginals.push_back(matrix_from_json(block));
        }
        break;
    case CouplingKind::MixtureWeight:
        for (const auto& row : j.at("pair_tpms")) {
            std::vector<Eigen::MatrixXd> inner;
            for (const auto& block : row) inner.push_back(matrix_from_json(block));
            params.coupling.pair_tpms.push_back(std::move(inner));
        }
        params.coupling.mixture_weights = matrix_from_json(j.at("mixture_weights"));
        break;
    case CouplingKind::IndependentChains:
    case CouplingKind::SingleChain:
        for (const auto& block : j.at("chain_tpms")) {
            params.coupling.chain_tpms.push_back(matrix_from_json(block));
        }
        break;
    }
    for (const auto& chain : j.at("emissions")) {
        std::vector<StateEmission> states;
        for (const auto& em : chain) states.push_back(emission_from_json(em));
        params.emissions.push_back(std::move(states));
    }
    return params;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

LoadedModel model_from_json(const json& j) {
    try {
        if (j.at("schema_version").get<int>() != kModelSchemaVersion) {
            throw ConfigError("unsupported model schema version");
        }
        LoadedModel loaded;
        loaded.spec = spec_from_json(j.at("model"));
        loaded.params = params_from_json(loaded.spec, j.at("parameters"));
        return loaded;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed model JSON: ") + e.what());
    }
}

} // namespace

void save_model(const std::string& path, const ModelSpec& spec, const NaturalParams& params) {
    spec.validate();
    json out{{"schema_version", kModelSchemaVersion},
             {"library_version", kLibraryVersion},
             {"state_ordering", "ascending state-dependent mean within each chain"},
             {"model", spec_to_json(spec)},
             {"parameters", params_to_json(spec, params)}};
    std::ofstream file(path);
    if (!file) throw ConfigError("cannot write file: " + path);
    file << out.dump(2) << "\n";
}

LoadedModel load_model(const std::string& path) { return model_from_json(load_json_file(path)); }

namespace {

RunConfig run_config_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kConfigSchemaVersion) {
        throw ConfigError("unsupported config schema version");
    }
    RunConfig config;

    const json& model = j.at("model");
    config.model.space = StateSpace(model.at("num_chains").get<int>(),
                                    model.at("states_per_chain").get<int>());
    config.model.coupling = coupling_from_string(model.at("coupling").get<std::string>());
    for (const auto& f : model.at("families")) {
        config.model.families.push_back(family_from_string(f.get<std::string>()));
    }
    if (model.contains("covariate_columns")) {
        config.data.covariate_columns =
            model.at("covariate_columns").get<std::vector<std::vector<std::string>>>();
    }
    config.data.covariate_columns.resize(config.model.families.size());
    for (const auto& cols : config.data.covariate_columns) {
        config.model.covariate_counts.push_back(static_cast<int>(cols.size()));
    }
    config.model.validate();

    if (j.contains("fit")) {
        const json& fit = j.at("fit");
        config.fit_options.restarts = fit.value("restarts", config.fit_options.restarts);
        config.fit_options.seed = fit.value("seed", config.fit_options.seed);
        config.fit_options.tolerance = fit.value("tolerance", config.fit_options.tolerance);
        config.fit_options.max_iter = fit.value("max_iter", config.fit_options.max_iter);
    }

    if (j.contains("data")) {
        const json& data = j.at("data");
        config.data.path = data.value("path", std::string());
        config.data.time_column = data.value("time_column", std::string());
        config.data.observation_columns =
            data.value("observation_columns", std::vector<std::string>{});
        config.data.missing_marker = data.value("missing_marker", std::string("NA"));
        config.data.standardize = data.value("standardize_covariates", true);
    }
    config.data.families = config.model.families;
    config.data.seed = config.fit_options.seed;

    config.out_dir = j.value("out_dir", config.out_dir);
    if (j.contains("output")) {
        config.out_dir = j.at("output").value("directory", config.out_dir);
    }

    if (j.contains("simstudy")) {
        const json& study = j.at("simstudy");
        config.has_study = true;
        if (study.contains("truth_model")) {
            config.truth_model_path = study.at("truth_model").get<std::string>();
        } else if (study.contains("truth")) {
            config.truth_inline_json = study.at("truth").dump();
        } else {
            throw ConfigError("simstudy block needs 'truth_model' (path) or inline 'truth'");
        }
        config.study_t_train = study.value("t_train", 1000);
        config.study_t_test = study.value("t_test", 100);
        config.study_replications = study.value("replications", 100);
        config.study_restarts = study.value("restarts", 5);
        config.study_competitors =
            study.value("competitors", std::vector<std::string>{"cartesian_full", "single_chain",
                                                                "independent_chains"});
    }
    return config;
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    const json j = load_json_file(path);
    try {
        return run_config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON in " + path + ": " + e.what());
    }
}

LoadedModel load_model_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid inline model JSON: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace chmm
