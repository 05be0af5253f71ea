#include "chmm/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "chmm/optimize.hpp"
#include "chmm/transition.hpp"

namespace chmm {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void hash_doubles(std::uint64_t& h, const double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data[i], sizeof(bits));
        h ^= bits;
        h *= 0x100000001b3ULL;
    }
}

Eigen::MatrixXd random_tpm(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> diag_mass(0.7, 0.95);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    Eigen::MatrixXd tpm(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double d = dim > 1 ? diag_mass(rng) : 1.0;
        double off_sum = 0.0;
        for (int j = 0; j < dim; ++j) {
            if (j == i) continue;
            tpm(i, j) = unit(rng);
            off_sum += tpm(i, j);
        }
        for (int j = 0; j < dim; ++j) {
            tpm(i, j) = j == i ? d : tpm(i, j) / off_sum * (1.0 - d);
        }
    }
    return tpm;
}

// Empirical quantile of the non-missing values in column m.
double column_quantile(const ObservationSet& data, int m, double q) {
    std::vector<double> values;
    values.reserve(data.T());
    for (int t = 0; t < data.T(); ++t) {
        if (!data.missing(t, m)) values.push_back(data.y(t, m));
    }
    if (values.empty()) throw DataError("column " + std::to_string(m + 1) + " has no data");
    std::sort(values.begin(), values.end());
    const double pos = q * (static_cast<double>(values.size()) - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double column_sd(const ObservationSet& data, int m) {
    double sum = 0.0, sq = 0.0;
    int count = 0;
    for (int t = 0; t < data.T(); ++t) {
        if (data.missing(t, m)) continue;
        sum += data.y(t, m);
        sq += data.y(t, m) * data.y(t, m);
        ++count;
    }
    if (count < 2) return 1.0;
    const double mean = sum / count;
    return std::sqrt(std::max(1e-12, sq / count - mean * mean));
}

// Mean and variance of the non-missing values in column m that fall between
// the q_lo and q_hi empirical quantiles. Used for moment-based starts.
std::pair<double, double> bin_moments(const ObservationSet& data, int m,
                                      double q_lo, double q_hi) {
    const double lo = column_quantile(data, m, q_lo);
    const double hi = column_quantile(data, m, q_hi);
    double sum = 0.0, sq = 0.0;
    int count = 0;
    for (int t = 0; t < data.T(); ++t) {
        if (data.missing(t, m)) continue;
        const double v = data.y(t, m);
        if (v < lo || v > hi) continue;
        sum += v;
        sq += v * v;
        ++count;
    }
    if (count < 2) {
        const double center = 0.5 * (lo + hi);
        return {center, std::max(1e-8, center * center * 0.1)};
    }
    const double mean = sum / count;
    return {mean, std::max(1e-10, sq / count - mean * mean)};
}

} // namespace

std::uint64_t data_fingerprint(const ObservationSet& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_doubles(h, data.y.data(), data.y.size());
    for (Eigen::Index i = 0; i < data.missing.size(); ++i) {
        h ^= data.missing.data()[i] ? 0x9eULL : 0x31ULL;
        h *= 0x100000001b3ULL;
    }
    for (const auto& block : data.covariates) hash_doubles(h, block.data(), block.size());
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master ^ (0xd1b54a32d192ed03ULL * (index + 1));
    return splitmix64(state);
}

NaturalParams random_start(const ModelSpec& spec, const ObservationSet& data,
                           std::uint64_t seed, bool jitter) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int m_count = spec.space.num_chains;
    const int n = spec.space.states_per_chain;
    const int k = spec.space.product_dim();

    NaturalParams params;
    params.coupling.kind = spec.coupling;
    switch (spec.coupling) {
    case CouplingKind::CartesianFull:
        params.coupling.cartesian = random_tpm(k, rng);
        break;
    case CouplingKind::CondIndep: {
        // Start from per-chain dynamics replicated across previous
        // product states, with mild jitter.
        params.coupling.cond_marginals.assign(m_count, Eigen::MatrixXd(k, n));
        for (int m = 0; m < m_count; ++m) {
            const Eigen::MatrixXd base = random_tpm(n, rng);
            for (int prev = 0; prev < k; ++prev) {
                Eigen::VectorXd row = base.row(chain_state_of(prev, m, spec.space));
                for (int j = 0; j < n; ++j) row(j) = std::max(1e-3, row(j) + 0.02 * unit(rng));
                params.coupling.cond_marginals[m].row(prev) = row / row.sum();
            }
        }
        break;
    }
    case CouplingKind::MixtureWeight: {
        params.coupling.pair_tpms.assign(m_count, std::vector<Eigen::MatrixXd>(m_count));
        for (int m = 0; m < m_count; ++m) {
            for (int src = 0; src < m_count; ++src) {
                params.coupling.pair_tpms[m][src] =
                    m == src ? random_tpm(n, rng)
                             : Eigen::MatrixXd::Constant(n, n, 1.0 / n);
            }
        }
        params.coupling.mixture_weights = random_tpm(m_count, rng);
        break;
    }
    case CouplingKind::IndependentChains:
        params.coupling.chain_tpms.resize(m_count);
        for (int m = 0; m < m_count; ++m) params.coupling.chain_tpms[m] = random_tpm(n, rng);
        break;
    case CouplingKind::SingleChain:
        params.coupling.chain_tpms.assign(1, random_tpm(n, rng));
        break;
    }

    params.emissions.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        const double sd = column_sd(data, m);
        params.emissions[m].resize(n);
        for (int s = 0; s < n; ++s) {
            const double q = (s + 0.5) / n;
            double center = column_quantile(data, m, q);
            if (jitter) center += 0.3 * sd * noise(rng);
            StateEmission em;
            em.family = spec.families[m];
            switch (spec.families[m]) {
            case EmissionFamily::Normal:
                em.mean = center;
                em.sigma = sd * (jitter ? 0.5 + 0.5 * unit(rng) : 0.75);
                break;
            case EmissionFamily::Beta: {
                // Moment-match alpha/beta to the quantile bin for this state;
                // plain quantile centers with a fixed small concentration sit
                // too far from tightly concentrated truths to optimize from.
                const auto [bin_mean, bin_var] =
                    bin_moments(data, m, static_cast<double>(s) / n,
                                static_cast<double>(s + 1) / n);
                double target = std::clamp(bin_mean, 1e-4, 1.0 - 1e-4);
                double conc = target * (1.0 - target) / bin_var - 1.0;
                conc = std::clamp(conc, 2.0, 1e5);
                if (jitter) {
                    target = std::clamp(target * std::exp(0.3 * noise(rng)),
                                        1e-4, 1.0 - 1e-4);
                    conc *= std::exp(0.5 * noise(rng));
                }
                em.alpha = target * conc;
                em.beta = (1.0 - target) * conc;
                break;
            }
            case EmissionFamily::NormalRegression:
                em.coef = Eigen::VectorXd::Zero(spec.covariate_counts[m] + 1);
                em.coef(0) = center;
                if (jitter) {
                    for (int j = 1; j <= spec.covariate_counts[m]; ++j) {
                        em.coef(j) = 0.1 * sd * noise(rng);
                    }
                }
                em.sigma = sd * (jitter ? 0.5 + 0.5 * unit(rng) : 0.75);
                break;
            }
            params.emissions[m][s] = em;
        }
    }
    return params;
}

FitResult fit(const ModelSpec& spec, const ObservationSet& data, const FitOptions& options) {
    spec.validate();
    if (options.restarts < 1) throw ConfigError("fit: restarts must be >= 1");

    const auto objective = [&](const Eigen::VectorXd& w) {
        return -log_likelihood(spec, w, data);
    };

    struct RestartOutcome {
        RestartRecord record;
        Eigen::VectorXd working;
    };
    std::vector<RestartOutcome> outcomes(options.restarts);

    auto run_restart = [&](int r) {
        std::uint64_t restart_seed = derive_seed(options.seed, static_cast<std::uint64_t>(r));
        RestartOutcome& out = outcomes[r];
        out.record.seed = restart_seed;

        // Resample the start until the likelihood is finite there.
        Eigen::VectorXd w0;
        bool have_start = false;
        if (r == 0 && options.initial_working) {
            w0 = *options.initial_working;
            try {
                have_start = std::isfinite(log_likelihood(spec, w0, data));
            } catch (const NumericalError&) {
                have_start = false;
            }
        }
        for (int attempt = 0; attempt < 20 && !have_start; ++attempt) {
            const NaturalParams start =
                random_start(spec, data, derive_seed(restart_seed, attempt), r > 0 || attempt > 0);
            w0 = pack_working(spec, start);
            try {
                have_start = std::isfinite(log_likelihood(spec, w0, data));
            } catch (const NumericalError&) {
                have_start = false;
            }
        }
        if (!have_start) {
            out.record.message = "no finite starting point found";
            out.record.loglik = -std::numeric_limits<double>::infinity();
            return;
        }

        BfgsOptions bfgs;
        bfgs.max_iter = options.max_iter;
        bfgs.grad_tol = options.tolerance;
        const BfgsResult res = bfgs_minimize(objective, w0, bfgs);
        out.record.loglik = -res.f;
        out.record.converged = res.converged;
        out.record.iterations = res.iterations;
        out.record.message = res.message;
        out.working = res.x;
    };

    if (options.threads > 1 && options.restarts > 1) {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        const int thread_count = std::min(options.threads, options.restarts);
        workers.reserve(thread_count);
        for (int w = 0; w < thread_count; ++w) {
            workers.emplace_back([&] {
                for (int r = next.fetch_add(1); r < options.restarts; r = next.fetch_add(1)) {
                    run_restart(r);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    } else {
        for (int r = 0; r < options.restarts; ++r) run_restart(r);
    }

    int best = -1;
    for (int r = 0; r < options.restarts; ++r) {
        if (!outcomes[r].record.converged) continue;
        if (best < 0 || outcomes[r].record.loglik > outcomes[best].record.loglik) best = r;
    }
    if (best < 0) {
        std::string diag = "fit: no restart converged;";
        for (const auto& out : outcomes) {
            diag += " [seed=" + std::to_string(out.record.seed) + " " + out.record.message + "]";
        }
        throw NumericalError(diag);
    }

    FitResult result;
    result.spec = spec;
    result.natural = order_states(spec, unpack_working(spec, outcomes[best].working));
    result.working = pack_working(spec, result.natural);
    result.loglik = outcomes[best].record.loglik;
    result.aic = -2.0 * result.loglik + 2.0 * spec.free_param_count();
    result.data_fingerprint = data_fingerprint(data);
    for (auto& out : outcomes) result.restarts.push_back(std::move(out.record));

    if (spec.coupling == CouplingKind::MixtureWeight) {
        const auto& w = result.natural.coupling.mixture_weights;
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                if (i != j && w(i, j) < 1e-6) result.weights_degenerate = true;
            }
        }
    }

    if (options.compute_std_errors) standard_errors(result, data);
    return result;
}

std::optional<Eigen::VectorXd> standard_errors(FitResult& result, const ObservationSet& data) {
    const ModelSpec& spec = result.spec;
    const auto objective = [&](const Eigen::VectorXd& w) {
        return -log_likelihood(spec, w, data);
    };

    // Boundary diagnostics: floored probabilities make the Hessian
    // unreliable in those directions.
    bool floored = false;
    pack_working(spec, result.natural, &floored);

    const Eigen::MatrixXd hessian = fd_hessian(objective, result.working, 1e-5);
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success) {
        result.se_warning = floored
            ? "Hessian not positive definite (parameter at transform boundary)"
            : "Hessian not positive definite at the reported optimum";
        result.std_errors.reset();
        return std::nullopt;
    }
    const Eigen::MatrixXd cov_working =
        llt.solve(Eigen::MatrixXd::Identity(hessian.rows(), hessian.cols()));

    // Jacobian of the flattened natural parameters w.r.t. the working
    // vector, by central differences.
    const Eigen::VectorXd base = flatten_natural(spec, result.natural);
    Eigen::MatrixXd jac(base.size(), result.working.size());
    Eigen::VectorXd wp = result.working;
    for (Eigen::Index i = 0; i < result.working.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(wp(i)));
        wp(i) = result.working(i) + h;
        const Eigen::VectorXd fp = flatten_natural(spec, unpack_working(spec, wp));
        wp(i) = result.working(i) - h;
        const Eigen::VectorXd fm = flatten_natural(spec, unpack_working(spec, wp));
        wp(i) = result.working(i);
        jac.col(i) = (fp - fm) / (2.0 * h);
    }

    Eigen::VectorXd se(base.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        const double var = jac.row(i) * cov_working * jac.row(i).transpose();
        se(i) = std::sqrt(std::max(0.0, var));
    }
    if (floored) {
        result.se_warning = "parameter at transform boundary; standard errors may be unreliable";
    }
    result.std_errors = se;
    return result.std_errors;
}

double aic(const FitResult& result) { return result.aic; }

std::vector<int> compare_models(const std::vector<FitResult>& results) {
    if (results.empty()) throw ConfigError("compare_models: no results");
    for (const auto& r : results) {
        if (r.data_fingerprint != results.front().data_fingerprint) {
            throw ConfigError("compare_models: results were fitted on different data sets");
        }
    }
    std::vector<int> order(results.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return results[a].aic < results[b].aic; });
    return order;
}

} // namespace chmm
