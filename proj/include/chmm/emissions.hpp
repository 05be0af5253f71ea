#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chmm/coupling.hpp"
#include "chmm/state_space.hpp"

namespace chmm {

enum class EmissionFamily { Normal, Beta, NormalRegression };

std::string to_string(EmissionFamily family);
EmissionFamily family_from_string(const std::string& name);

/// State-dependent distribution of one chain in one state.
struct StateEmission {
    EmissionFamily family = EmissionFamily::Normal;
    double mean = 0.0;  // Normal
    double sigma = 1.0; // Normal / NormalRegression standard deviation
    double alpha = 1.0; // Beta
    double beta = 1.0;  // Beta
    Eigen::VectorXd coef; // NormalRegression: [intercept, slope_1, ..., slope_p]

    /// Ordering key used for the ascending-mean label convention:
    /// Normal mean, Beta alpha/(alpha+beta), regression intercept.
    double location() const;
};

/// Log density of y. covariate_row is required (and used) only for
/// NormalRegression. Out-of-support y gives -inf.
double log_density(const StateEmission& em, double y,
                   const Eigen::RowVectorXd& covariate_row = Eigen::RowVectorXd());

struct ObservationSet {
    Eigen::MatrixXd y;                       // T x M
    std::vector<Eigen::MatrixXd> covariates; // per chain: T x p (0 columns if none)
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing; // T x M

    int T() const { return static_cast<int>(y.rows()); }
    int M() const { return static_cast<int>(y.cols()); }

    /// Contiguous row slice [begin, begin+count).
    ObservationSet rows(int begin, int count) const;
    static ObservationSet concat(const ObservationSet& a, const ObservationSet& b);

    /// All-present mask for observations without missing values.
    static ObservationSet from_matrix(const Eigen::MatrixXd& y);
};

/// Length-K vector of log f(y_t | product state), summing per-chain log
/// densities under contemporaneous conditional independence. Missing
/// entries contribute 0 (density 1). `kind` controls the product-state to
/// chain-state mapping (SingleChain reads the same state for all chains).
Eigen::VectorXd emission_log_diag(const std::vector<std::vector<StateEmission>>& emissions,
                                  const ObservationSet& data, int t, const StateSpace& space,
                                  CouplingKind kind);

/// Replaces exact zeros by draws uniform on (1e-8, 1e-6), deterministic
/// given seed. Values outside [0, 1) raise DataError.
Eigen::VectorXd shift_zeros(const Eigen::VectorXd& column, std::uint64_t seed);

/// Centers and scales every covariate column to zero mean / unit variance
/// (constant columns are left centered only).
void standardize_covariates(ObservationSet& data);

} // namespace chmm
