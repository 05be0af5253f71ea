#include "doctest.h"

#include <limits>
#include <random>

#include "chmm/likelihood.hpp"
#include "chmm/transition.hpp"
#include "oracles.hpp"

using namespace chmm;

namespace {

Eigen::MatrixXd random_log_emissions(int t_count, int k, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd log_e(t_count, k);
    for (int t = 0; t < t_count; ++t) {
        for (int j = 0; j < k; ++j) log_e(t, j) = -1.0 + noise(rng);
    }
    return log_e;
}

} // namespace

TEST_CASE("single observation forward value is log(delta . f)") {
    Eigen::MatrixXd tpm(2, 2);
    tpm << 0.9, 0.1, 0.5, 0.5;
    Eigen::VectorXd delta(2);
    delta << 5.0 / 6.0, 1.0 / 6.0;
    Eigen::MatrixXd log_e(1, 2);
    log_e << std::log(0.4), std::log(0.2);
    const double expected = std::log(5.0 / 6.0 * 0.4 + 1.0 / 6.0 * 0.2);
    CHECK(forward_loglik(tpm, delta, log_e) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("forward recursion matches brute-force enumeration") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 3);
        const int t_count = 2 + static_cast<int>(rng() % 5);
        const Eigen::MatrixXd tpm = oracle::random_tpm(k, rng);
        const Eigen::VectorXd delta = stationary_distribution(tpm);
        const Eigen::MatrixXd log_e = random_log_emissions(t_count, k, rng);
        CHECK(forward_loglik(tpm, delta, log_e) ==
              doctest::Approx(oracle::enum_loglik(tpm, delta, log_e)).epsilon(1e-10));
    }
}

TEST_CASE("forward recursion matches the scaled probability-space reference") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 8);
        const Eigen::MatrixXd tpm = oracle::random_tpm(k, rng);
        const Eigen::VectorXd delta = stationary_distribution(tpm);
        const Eigen::MatrixXd log_e = random_log_emissions(500, k, rng);
        const double ll = forward_loglik(tpm, delta, log_e);
        const double reference = oracle::scaled_forward(tpm, delta, log_e);
        CHECK(ll == doctest::Approx(reference).epsilon(1e-12));
    }
}

TEST_CASE("forward stays finite under extreme log densities") {
    Eigen::MatrixXd tpm(2, 2);
    tpm << 0.9, 0.1, 0.5, 0.5;
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    Eigen::MatrixXd log_e(3, 2);
    log_e << -5000.0, -5010.0, -4990.0, -5005.0, -5002.0, -4998.0;
    const double ll = forward_loglik(tpm, delta, log_e);
    CHECK(std::isfinite(ll));
    // Shifting every log density shifts the log likelihood by T * shift.
    const double shifted = forward_loglik(tpm, delta, log_e.array() + 5000.0);
    CHECK(ll == doctest::Approx(shifted - 3 * 5000.0).epsilon(1e-10));
}

TEST_CASE("impossible observation raises NumericalError naming the time index") {
    Eigen::MatrixXd tpm(2, 2);
    tpm << 0.9, 0.1, 0.5, 0.5;
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    Eigen::MatrixXd log_e(3, 2);
    log_e.setConstant(-1.0);
    log_e.row(1).setConstant(-std::numeric_limits<double>::infinity());
    try {
        forward_loglik(tpm, delta, log_e);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("model log likelihood wires TPM, stationary start, and emissions together") {
    const ModelSpec spec = oracle::study_truth_spec();
    const NaturalParams truth = oracle::study_truth_params();

    Eigen::MatrixXd y(4, 2);
    y << 2.1, 2.0, 5.8, 4.9, 6.2, 5.1, 2.2, 1.8;
    const ObservationSet data = ObservationSet::from_matrix(y);

    const Eigen::MatrixXd tpm = oracle::study_tpm();
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    const Eigen::MatrixXd log_e = log_emission_matrix(spec, truth, data);
    REQUIRE(log_e.rows() == 4);
    REQUIRE(log_e.cols() == 4);

    // Spot-check one cell of the emission matrix against the direct sum.
    const double cell = log_density(truth.emissions[0][1], y(1, 0)) +
                        log_density(truth.emissions[1][1], y(1, 1));
    CHECK(log_e(1, 3) == doctest::Approx(cell).epsilon(1e-14));

    CHECK(log_likelihood(spec, truth, data) ==
          doctest::Approx(oracle::enum_loglik(tpm, delta, log_e)).epsilon(1e-10));
}

TEST_CASE("working-vector likelihood agrees with the natural-parameter path") {
    const ModelSpec spec = oracle::study_truth_spec();
    const NaturalParams truth = oracle::study_truth_params();
    const Eigen::VectorXd working = pack_working(spec, truth);

    Eigen::MatrixXd y(6, 2);
    y << 2.1, 2.0, 5.8, 4.9, 6.2, 5.1, 2.2, 1.8, 1.9, 2.3, 6.1, 4.7;
    const ObservationSet data = ObservationSet::from_matrix(y);
    CHECK(log_likelihood(spec, working, data) ==
          doctest::Approx(log_likelihood(spec, truth, data)).epsilon(1e-9));
}

TEST_CASE("missing rows leave the likelihood equal to the marginalised model") {
    // With every observation missing the likelihood is exactly 0 (log of a
    // probability-one event: nothing observed).
    const ModelSpec spec = oracle::study_truth_spec();
    const NaturalParams truth = oracle::study_truth_params();
    Eigen::MatrixXd y(3, 2);
    y.setZero();
    ObservationSet data = ObservationSet::from_matrix(y);
    data.missing.setConstant(3, 2, true);
    CHECK(log_likelihood(spec, truth, data) == doctest::Approx(0.0).epsilon(1e-12));
}
