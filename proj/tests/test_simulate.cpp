#include "doctest.h"

#include <cmath>
#include <random>

#include "chmm/likelihood.hpp"
#include "chmm/simulate.hpp"
#include "chmm/transition.hpp"
#include "oracles.hpp"

using namespace chmm;

TEST_CASE("simulation is deterministic given a seed and seed-sensitive") {
    const ModelSpec spec = oracle::study_truth_spec();
    const NaturalParams truth = oracle::study_truth_params();
    const SimulatedData a = simulate(spec, truth, 100, 1);
    const SimulatedData b = simulate(spec, truth, 100, 1);
    const SimulatedData c = simulate(spec, truth, 100, 2);
    CHECK((a.obs.y - b.obs.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.product_states - b.product_states).cwiseAbs().maxCoeff() == 0);
    CHECK((a.obs.y - c.obs.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("simulated shapes and chain-state encoding are consistent") {
    const ModelSpec spec = oracle::study_truth_spec();
    const SimulatedData sim = simulate(spec, oracle::study_truth_params(), 50, 3);
    CHECK(sim.obs.T() == 50);
    CHECK(sim.obs.M() == 2);
    CHECK(sim.product_states.size() == 50);
    CHECK(sim.chain_states.rows() == 50);
    CHECK(sim.chain_states.cols() == 2);
    for (int t = 0; t < 50; ++t) {
        CHECK(sim.product_states(t) >= 0);
        CHECK(sim.product_states(t) < 4);
        for (int m = 0; m < 2; ++m) {
            CHECK(sim.chain_states(t, m) ==
                  chain_state_of(sim.product_states(t), m, spec.space) + 1);
        }
    }
}

TEST_CASE("long-run state frequencies match the stationary distribution") {
    const ModelSpec spec = oracle::study_truth_spec();
    const SimulatedData sim = simulate(spec, oracle::study_truth_params(), 60000, 9);
    const Eigen::VectorXd delta = stationary_distribution(oracle::study_tpm());
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(4);
    for (int t = 0; t < sim.obs.T(); ++t) freq(sim.product_states(t)) += 1.0;
    freq /= sim.obs.T();
    CHECK((freq - delta).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("transition frequencies match the generating TPM") {
    const ModelSpec spec = oracle::study_truth_spec();
    const SimulatedData sim = simulate(spec, oracle::study_truth_params(), 60000, 10);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(4, 4);
    for (int t = 1; t < sim.obs.T(); ++t) {
        counts(sim.product_states(t - 1), sim.product_states(t)) += 1.0;
    }
    for (int i = 0; i < 4; ++i) counts.row(i) /= counts.row(i).sum();
    CHECK((counts - oracle::study_tpm()).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("emissions have state-conditional means and spreads near the truth") {
    const ModelSpec spec = oracle::study_truth_spec();
    const NaturalParams truth = oracle::study_truth_params();
    const SimulatedData sim = simulate(spec, truth, 40000, 11);
    for (int m = 0; m < 2; ++m) {
        for (int s = 0; s < 2; ++s) {
            double sum = 0.0, sq = 0.0;
            int n = 0;
            for (int t = 0; t < sim.obs.T(); ++t) {
                if (sim.chain_states(t, m) != s + 1) continue;
                sum += sim.obs.y(t, m);
                sq += sim.obs.y(t, m) * sim.obs.y(t, m);
                ++n;
            }
            const double mean = sum / n;
            const double sd = std::sqrt(sq / n - mean * mean);
            CHECK(mean == doctest::Approx(truth.emissions[m][s].mean).epsilon(0.03));
            CHECK(sd == doctest::Approx(truth.emissions[m][s].sigma).epsilon(0.03));
        }
    }
}

TEST_CASE("deterministic transition rows give a constant continuation") {
    // Row 0 is absorbing; starting mass concentrates there and the path
    // never leaves. A fully deterministic identity TPM has no unique
    // stationary law and must be rejected instead.
    ModelSpec spec;
    spec.space = StateSpace(1, 2);
    spec.coupling = CouplingKind::CartesianFull;
    spec.families = {EmissionFamily::Normal};
    spec.covariate_counts = {0};

    NaturalParams params;
    params.coupling.kind = CouplingKind::CartesianFull;
    Eigen::MatrixXd tpm(2, 2);
    tpm << 1.0, 0.0, 0.5, 0.5;
    params.coupling.cartesian = tpm;
    params.emissions = {{StateEmission{}, StateEmission{}}};
    params.emissions[0][1].mean = 5.0;

    const SimulatedData sim = simulate(spec, params, 200, 8);
    CHECK(sim.product_states.maxCoeff() == 0);

    params.coupling.cartesian = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(simulate(spec, params, 10, 8), NumericalError);
}

TEST_CASE("beta emissions stay inside the unit interval") {
    ModelSpec spec;
    spec.space = StateSpace(1, 2);
    spec.coupling = CouplingKind::CartesianFull;
    spec.families = {EmissionFamily::Beta};
    spec.covariate_counts = {0};

    std::mt19937_64 rng(21);
    NaturalParams params;
    params.coupling.kind = CouplingKind::CartesianFull;
    params.coupling.cartesian = oracle::random_tpm(2, rng);
    StateEmission a, b;
    a.family = b.family = EmissionFamily::Beta;
    a.alpha = 2.0;
    a.beta = 8.0;
    b.alpha = 6.0;
    b.beta = 2.0;
    params.emissions = {{a, b}};

    const SimulatedData sim = simulate(spec, params, 5000, 13);
    CHECK(sim.obs.y.minCoeff() > 0.0);
    CHECK(sim.obs.y.maxCoeff() < 1.0);
    // State-conditional means approach alpha / (alpha + beta).
    double sum0 = 0.0, sum1 = 0.0;
    int n0 = 0, n1 = 0;
    for (int t = 0; t < sim.obs.T(); ++t) {
        if (sim.product_states(t) == 0) {
            sum0 += sim.obs.y(t, 0);
            ++n0;
        } else {
            sum1 += sim.obs.y(t, 0);
            ++n1;
        }
    }
    CHECK(sum0 / n0 == doctest::Approx(0.2).epsilon(0.1));
    CHECK(sum1 / n1 == doctest::Approx(0.75).epsilon(0.1));
}

TEST_CASE("regression chains require covariates and respond to them") {
    ModelSpec spec;
    spec.space = StateSpace(1, 2);
    spec.coupling = CouplingKind::CartesianFull;
    spec.families = {EmissionFamily::NormalRegression};
    spec.covariate_counts = {1};

    NaturalParams params;
    params.coupling.kind = CouplingKind::CartesianFull;
    Eigen::MatrixXd tpm(2, 2);
    tpm << 0.95, 0.05, 0.05, 0.95;
    params.coupling.cartesian = tpm;
    StateEmission lo, hi;
    lo.family = hi.family = EmissionFamily::NormalRegression;
    lo.sigma = hi.sigma = 0.2;
    lo.coef = Eigen::VectorXd(2);
    lo.coef << 0.0, 2.0;
    hi.coef = Eigen::VectorXd(2);
    hi.coef << 10.0, -1.0;
    params.emissions = {{lo, hi}};

    CHECK_THROWS_AS(simulate(spec, params, 10, 1), DataError);

    const int t_count = 4000;
    Eigen::MatrixXd x(t_count, 1);
    for (int t = 0; t < t_count; ++t) x(t, 0) = std::sin(0.01 * t);
    const SimulatedData sim = simulate(spec, params, t_count, 14, {x});

    // Residuals against the state-specific regression line are standard.
    double sq = 0.0;
    for (int t = 0; t < t_count; ++t) {
        const auto& em = params.emissions[0][sim.product_states(t)];
        const double mu = em.coef(0) + em.coef(1) * x(t, 0);
        const double r = sim.obs.y(t, 0) - mu;
        sq += r * r;
    }
    CHECK(std::sqrt(sq / t_count) == doctest::Approx(0.2).epsilon(0.06));
}

TEST_CASE("forecast score is the conditional likelihood of the test block") {
    const ModelSpec spec = oracle::study_truth_spec();
    const NaturalParams truth = oracle::study_truth_params();
    const SimulatedData sim = simulate(spec, truth, 120, 17);
    const ObservationSet train = sim.obs.rows(0, 100);
    const ObservationSet test = sim.obs.rows(100, 20);

    const double score = forecast_score(spec, truth, train, test);
    const double expected =
        log_likelihood(spec, truth, sim.obs) - log_likelihood(spec, truth, train);
    CHECK(score == doctest::Approx(expected).epsilon(1e-10));
    CHECK(score < 0.0);

    CHECK(forecast_score(spec, truth, train, train.rows(0, 0)) == 0.0);
}
