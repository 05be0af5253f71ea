#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chmm/emissions.hpp"

namespace chmm {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // throws DataError if absent
};

CsvTable read_csv(const std::string& path);

/// Column mapping for turning a CSV file into an ObservationSet.
struct DataConfig {
    std::string path;
    std::string time_column;                        // optional; must be non-decreasing
    std::vector<std::string> observation_columns;   // one per chain
    std::vector<std::vector<std::string>> covariate_columns; // per chain
    std::string missing_marker = "NA";              // empty cells always count as missing
    std::vector<EmissionFamily> families;           // beta columns get shift_zeros
    std::uint64_t seed = 1;
    bool standardize = true;                        // covariates to zero mean / unit variance
};

/// Reads, validates, zero-shifts beta columns, and standardizes
/// covariates. Missing covariates on an observed row are a data error.
ObservationSet ingest_csv(const DataConfig& config);

/// CSV writer at 17 significant digits (lossless double round-trip).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double value);

} // namespace chmm
