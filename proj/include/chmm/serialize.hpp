#pragma once

#include <string>

#include "chmm/csv.hpp"
#include "chmm/fit.hpp"
#include "chmm/model.hpp"

namespace chmm {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kConfigSchemaVersion = 1;

/// Writes spec + natural parameters (plus the state-ordering convention
/// and library version) as JSON, so decode/forecast reload fits exactly.
void save_model(const std::string& path, const ModelSpec& spec, const NaturalParams& params);

struct LoadedModel {
    ModelSpec spec;
    NaturalParams params;
};

LoadedModel load_model(const std::string& path);

/// Parses a model from an in-memory JSON string (used for inline truth
/// blocks in simstudy configs).
LoadedModel load_model_from_string(const std::string& text);

/// CLI run configuration (JSON file; flags may override fields).
struct RunConfig {
    ModelSpec model;
    DataConfig data;
    FitOptions fit_options;
    std::string out_dir = "out";

    // simstudy block (optional)
    bool has_study = false;
    std::string truth_model_path;      // either a path or inline truth JSON
    std::string truth_inline_json;
    int study_t_train = 1000;
    int study_t_test = 100;
    int study_replications = 100;
    int study_restarts = 5;
    std::vector<std::string> study_competitors;
};

RunConfig load_run_config(const std::string& path);

} // namespace chmm
