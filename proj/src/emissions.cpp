#include "chmm/emissions.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace chmm {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
} // namespace

std::string to_string(EmissionFamily family) {
    switch (family) {
    case EmissionFamily::Normal: return "normal";
    case EmissionFamily::Beta: return "beta";
    case EmissionFamily::NormalRegression: return "normal_regression";
    }
    throw ConfigError("unknown emission family");
}

EmissionFamily family_from_string(const std::string& name) {
    if (name == "normal") return EmissionFamily::Normal;
    if (name == "beta") return EmissionFamily::Beta;
    if (name == "normal_regression") return EmissionFamily::NormalRegression;
    throw ConfigError("unknown emission family: " + name);
}

double StateEmission::location() const {
    switch (family) {
    case EmissionFamily::Normal: return mean;
    case EmissionFamily::Beta: return alpha / (alpha + beta);
    case EmissionFamily::NormalRegression: return coef(0);
    }
    throw ConfigError("unknown emission family");
}

double log_density(const StateEmission& em, double y, const Eigen::RowVectorXd& covariate_row) {
    switch (em.family) {
    case EmissionFamily::Normal: {
        if (em.sigma <= 0) throw NumericalError("normal emission with sigma <= 0");
        const double z = (y - em.mean) / em.sigma;
        return -0.5 * (kLogTwoPi + z * z) - std::log(em.sigma);
    }
    case EmissionFamily::Beta: {
        if (em.alpha <= 0 || em.beta <= 0) {
            throw NumericalError("beta emission with nonpositive shape");
        }
        if (y <= 0.0 || y >= 1.0) return kNegInf;
        const double lbeta =
            std::lgamma(em.alpha) + std::lgamma(em.beta) - std::lgamma(em.alpha + em.beta);
        return (em.alpha - 1.0) * std::log(y) + (em.beta - 1.0) * std::log1p(-y) - lbeta;
    }
    case EmissionFamily::NormalRegression: {
        if (em.sigma <= 0) throw NumericalError("regression emission with sigma <= 0");
        if (covariate_row.size() + 1 != em.coef.size()) {
            throw DataError("regression emission: covariate row length " +
                            std::to_string(covariate_row.size()) + " does not match " +
                            std::to_string(em.coef.size() - 1) + " slopes");
        }
        double mu = em.coef(0);
        for (Eigen::Index p = 0; p < covariate_row.size(); ++p) {
            mu += em.coef(p + 1) * covariate_row(p);
        }
        const double z = (y - mu) / em.sigma;
        return -0.5 * (kLogTwoPi + z * z) - std::log(em.sigma);
    }
    }
    throw ConfigError("unknown emission family");
}

ObservationSet ObservationSet::rows(int begin, int count) const {
    if (begin < 0 || count < 0 || begin + count > T()) {
        throw DataError("ObservationSet::rows: slice out of range");
    }
    ObservationSet out;
    out.y = y.middleRows(begin, count);
    out.missing = missing.middleRows(begin, count);
    out.covariates.reserve(covariates.size());
    for (const auto& c : covariates) out.covariates.push_back(c.middleRows(begin, count));
    return out;
}

ObservationSet ObservationSet::concat(const ObservationSet& a, const ObservationSet& b) {
    if (a.M() != b.M() || a.covariates.size() != b.covariates.size()) {
        throw DataError("ObservationSet::concat: incompatible shapes");
    }
    ObservationSet out;
    out.y.resize(a.T() + b.T(), a.M());
    out.y << a.y, b.y;
    out.missing.resize(a.T() + b.T(), a.M());
    out.missing << a.missing, b.missing;
    for (std::size_t m = 0; m < a.covariates.size(); ++m) {
        if (a.covariates[m].cols() != b.covariates[m].cols()) {
            throw DataError("ObservationSet::concat: covariate widths differ");
        }
        Eigen::MatrixXd c(a.T() + b.T(), a.covariates[m].cols());
        c << a.covariates[m], b.covariates[m];
        out.covariates.push_back(std::move(c));
    }
    return out;
}

ObservationSet ObservationSet::from_matrix(const Eigen::MatrixXd& y) {
    ObservationSet out;
    out.y = y;
    out.missing.setConstant(y.rows(), y.cols(), false);
    out.covariates.assign(y.cols(), Eigen::MatrixXd(y.rows(), 0));
    return out;
}

Eigen::VectorXd emission_log_diag(const std::vector<std::vector<StateEmission>>& emissions,
                                  const ObservationSet& data, int t, const StateSpace& space,
                                  CouplingKind kind) {
    const int m_count = space.num_chains;
    const int n = space.states_per_chain;
    const int k = run_dim(kind, space);

    // Per-chain, per-state log densities at time t; missing contributes 0.
    Eigen::MatrixXd per_chain = Eigen::MatrixXd::Zero(m_count, n);
    for (int m = 0; m < m_count; ++m) {
        if (data.missing(t, m)) continue;
        Eigen::RowVectorXd cov;
        if (!data.covariates.empty() && data.covariates[m].cols() > 0) {
            cov = data.covariates[m].row(t);
        }
        for (int s = 0; s < n; ++s) {
            per_chain(m, s) = log_density(emissions[m][s], data.y(t, m), cov);
        }
    }

    Eigen::VectorXd diag(k);
    for (int state = 0; state < k; ++state) {
        double sum = 0.0;
        for (int m = 0; m < m_count; ++m) {
            const int s = kind == CouplingKind::SingleChain ? state
                                                            : chain_state_of(state, m, space);
            sum += per_chain(m, s);
        }
        diag(state) = sum;
    }
    return diag;
}

Eigen::VectorXd shift_zeros(const Eigen::VectorXd& column, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> shift(1e-8, 1e-6);
    Eigen::VectorXd out = column;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double v = out(i);
        if (v < 0.0 || v >= 1.0) {
            throw DataError("shift_zeros: value " + std::to_string(v) + " at row " +
                            std::to_string(i) + " outside [0, 1)");
        }
        if (v == 0.0) out(i) = shift(rng);
    }
    return out;
}

void standardize_covariates(ObservationSet& data) {
    for (auto& block : data.covariates) {
        for (Eigen::Index j = 0; j < block.cols(); ++j) {
            const double mean = block.col(j).mean();
            block.col(j).array() -= mean;
            const double sd = std::sqrt(block.col(j).squaredNorm() /
                                        std::max<Eigen::Index>(1, block.rows() - 1));
            if (sd > 0) block.col(j) /= sd;
        }
    }
}

} // namespace chmm
