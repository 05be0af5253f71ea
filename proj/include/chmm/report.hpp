#pragma once

#include <string>
#include <vector>

#include "chmm/fit.hpp"

namespace chmm {

/// Plot-ready state-dependent densities over a grid, with
/// stationary-weighted versions (density times the marginal stationary
/// probability of that chain state).
struct DensityGrid {
    Eigen::VectorXd grid;
    // densities[m][s] and weighted[m][s] are length grid.size();
    // weights[m][s] is the chain's marginal stationary probability.
    std::vector<std::vector<Eigen::VectorXd>> densities;
    std::vector<std::vector<Eigen::VectorXd>> weighted;
    std::vector<std::vector<double>> weights;
};

/// Regression chains evaluate the density at covariates = 0, i.e. at the
/// intercept (covariates are standardized before fitting). Throws
/// DataError if the grid leaves a beta family's support.
DensityGrid density_grid(const ModelSpec& spec, const NaturalParams& params,
                         const Eigen::VectorXd& grid);

void write_density_grid_csv(const std::string& path, const DensityGrid& grid);

/// Human-readable fit report: natural parameter table with standard
/// errors, log-likelihood, AIC, fit settings, and the restart trace.
std::string fit_report(const FitResult& result, const FitOptions& options);

} // namespace chmm
