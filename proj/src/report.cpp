#include "chmm/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "chmm/csv.hpp"
#include "chmm/transition.hpp"

namespace chmm {

DensityGrid density_grid(const ModelSpec& spec, const NaturalParams& params,
                         const Eigen::VectorXd& grid) {
    spec.validate();
    const int m_count = spec.space.num_chains;
    const int n = spec.space.states_per_chain;
    const int k = spec.run_dim();

    const Eigen::MatrixXd tpm = model_tpm(spec, params);
    const Eigen::VectorXd delta = stationary_distribution(tpm);

    DensityGrid out;
    out.grid = grid;
    out.densities.resize(m_count);
    out.weighted.resize(m_count);
    out.weights.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        if (spec.families[m] == EmissionFamily::Beta &&
            (grid.minCoeff() <= 0.0 || grid.maxCoeff() >= 1.0)) {
            throw DataError("density_grid: grid leaves the (0,1) support of chain " +
                            std::to_string(m + 1));
        }
        out.densities[m].resize(n);
        out.weighted[m].resize(n);
        out.weights[m].assign(n, 0.0);
        for (int state = 0; state < k; ++state) {
            out.weights[m][spec.chain_state0(state, m)] += delta(state);
        }
        Eigen::RowVectorXd zero_cov = Eigen::RowVectorXd::Zero(spec.covariate_counts[m]);
        for (int s = 0; s < n; ++s) {
            Eigen::VectorXd density(grid.size());
            for (Eigen::Index g = 0; g < grid.size(); ++g) {
                density(g) = std::exp(log_density(params.emissions[m][s], grid(g), zero_cov));
            }
            out.weighted[m][s] = out.weights[m][s] * density;
            out.densities[m][s] = std::move(density);
        }
    }
    return out;
}

void write_density_grid_csv(const std::string& path, const DensityGrid& grid) {
    std::vector<std::string> header{"chain", "state", "x", "density", "weight",
                                    "weighted_density"};
    std::vector<std::vector<double>> rows;
    for (std::size_t m = 0; m < grid.densities.size(); ++m) {
        for (std::size_t s = 0; s < grid.densities[m].size(); ++s) {
            for (Eigen::Index g = 0; g < grid.grid.size(); ++g) {
                rows.push_back({static_cast<double>(m + 1), static_cast<double>(s + 1),
                                grid.grid(g), grid.densities[m][s](g), grid.weights[m][s],
                                grid.weighted[m][s](g)});
            }
        }
    }
    write_csv(path, header, rows);
}

std::string fit_report(const FitResult& result, const FitOptions& options) {
    std::ostringstream out;
    out << "model: M=" << result.spec.space.num_chains
        << " N=" << result.spec.space.states_per_chain
        << " coupling=" << to_string(result.spec.coupling) << "\n";
    out << "free parameters: " << result.spec.free_param_count() << "\n";
    out << std::setprecision(10);
    out << "log-likelihood: " << result.loglik << "\n";
    out << "AIC: " << result.aic << "\n";
    out << "fit settings: restarts=" << options.restarts << " seed=" << options.seed
        << " tolerance=" << options.tolerance << " max_iter=" << options.max_iter << "\n";
    if (result.weights_degenerate) {
        out << "warning: off-diagonal mixture weight below 1e-6; the fitted model is "
               "effectively independent\n";
    }
    if (!result.se_warning.empty()) out << "warning: " << result.se_warning << "\n";

    out << "\nnatural parameters";
    out << (result.std_errors ? " (with standard errors)" : " (standard errors unavailable)");
    out << "\n";
    const auto labels = natural_labels(result.spec);
    const Eigen::VectorXd values = flatten_natural(result.spec, result.natural);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << "  " << labels[i] << " = " << values(static_cast<Eigen::Index>(i));
        if (result.std_errors) out << " (" << (*result.std_errors)(static_cast<Eigen::Index>(i)) << ")";
        out << "\n";
    }

    out << "\nrestarts (seed, loglik, converged, iterations)\n";
    for (const auto& r : result.restarts) {
        out << "  " << r.seed << "\t" << r.loglik << "\t" << (r.converged ? "yes" : "no") << "\t"
            << r.iterations << "\t" << r.message << "\n";
    }
    return out.str();
}

} // namespace chmm
