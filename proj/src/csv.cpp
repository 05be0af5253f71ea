#include "chmm/csv.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace chmm {

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("column not found: " + name);
    return static_cast<int>(it - header.begin());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"') {
            // Doubled quote inside a quoted field is an escaped quote.
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (c == ',' && !quoted) {
            fields.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(field);
    for (auto& f : fields) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
    }
    return fields;
}

double parse_number(const std::string& field, int row, const std::string& column) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(field, &consumed);
        if (consumed != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw DataError("unparseable number '" + field + "' at row " + std::to_string(row + 1) +
                        ", column " + column);
    }
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != table.header.size()) {
            throw DataError("row " + std::to_string(table.rows.size() + 1) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

ObservationSet ingest_csv(const DataConfig& config) {
    const CsvTable table = read_csv(config.path);
    if (table.rows.empty()) throw DataError("no data rows in " + config.path);
    const int t_count = static_cast<int>(table.rows.size());
    const int m_count = static_cast<int>(config.observation_columns.size());
    if (m_count < 1) throw ConfigError("no observation columns configured");

    auto is_missing = [&](const std::string& field) {
        return field.empty() || field == config.missing_marker;
    };

    if (!config.time_column.empty()) {
        const int tc = table.column(config.time_column);
        double prev = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < t_count; ++t) {
            const double v = parse_number(table.rows[t][tc], t, config.time_column);
            if (v < prev) {
                throw DataError("time column not non-decreasing at row " + std::to_string(t + 1));
            }
            prev = v;
        }
    }

    ObservationSet data;
    data.y.setZero(t_count, m_count);
    data.missing.setConstant(t_count, m_count, false);
    for (int m = 0; m < m_count; ++m) {
        const int col = table.column(config.observation_columns[m]);
        for (int t = 0; t < t_count; ++t) {
            const std::string& field = table.rows[t][col];
            if (is_missing(field)) {
                data.missing(t, m) = true;
            } else {
                data.y(t, m) = parse_number(field, t, config.observation_columns[m]);
            }
        }
    }

    data.covariates.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        const auto& names = m < static_cast<int>(config.covariate_columns.size())
                                ? config.covariate_columns[m]
                                : std::vector<std::string>{};
        data.covariates[m].resize(t_count, static_cast<int>(names.size()));
        for (std::size_t j = 0; j < names.size(); ++j) {
            const int col = table.column(names[j]);
            for (int t = 0; t < t_count; ++t) {
                const std::string& field = table.rows[t][col];
                if (is_missing(field)) {
                    if (!data.missing(t, m)) {
                        throw DataError("missing covariate '" + names[j] + "' at row " +
                                        std::to_string(t + 1) + " for an observed value");
                    }
                    data.covariates[m](t, static_cast<int>(j)) = 0.0;
                } else {
                    data.covariates[m](t, static_cast<int>(j)) = parse_number(field, t, names[j]);
                }
            }
        }
    }

    // Zero-shift beta-family columns on the present values only.
    for (int m = 0; m < m_count && m < static_cast<int>(config.families.size()); ++m) {
        if (config.families[m] != EmissionFamily::Beta) continue;
        Eigen::VectorXd col = data.y.col(m);
        // Placeholder 0.5 for missing cells keeps shift_zeros' range check
        // on real values only.
        for (int t = 0; t < t_count; ++t) {
            if (data.missing(t, m)) col(t) = 0.5;
        }
        col = shift_zeros(col, config.seed + static_cast<std::uint64_t>(m));
        for (int t = 0; t < t_count; ++t) {
            if (!data.missing(t, m)) data.y(t, m) = col(t);
        }
    }

    if (config.standardize) standardize_covariates(data);
    return data;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

std::string format_double(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

} // namespace chmm
