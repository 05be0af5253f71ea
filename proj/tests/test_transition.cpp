#include "doctest.h"

#include <random>

#include "chmm/transition.hpp"
#include "oracles.hpp"

using namespace chmm;

TEST_CASE("stationary distribution of the 4x4 study matrix") {
    const Eigen::VectorXd delta = stationary_distribution(oracle::study_tpm());
    Eigen::VectorXd expected(4);
    expected << 0.41, 0.09, 0.09, 0.41;
    CHECK((delta - expected).cwiseAbs().maxCoeff() < 0.005);
    // Synchronous states (1,1) and (2,2) carry 82% of the mass.
    CHECK(delta(0) + delta(3) == doctest::Approx(0.82).epsilon(0.0125));
}

TEST_CASE("uniform matrix has uniform stationary distribution") {
    const int k = 5;
    const Eigen::MatrixXd tpm = Eigen::MatrixXd::Constant(k, k, 1.0 / k);
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    CHECK((delta.array() - 1.0 / k).abs().maxCoeff() < 1e-12);
}

TEST_CASE("2x2 stationary distribution against the hand solve") {
    Eigen::MatrixXd tpm(2, 2);
    tpm << 0.9, 0.1, 0.5, 0.5;
    const Eigen::VectorXd delta = stationary_distribution(tpm);
    CHECK(delta(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(delta(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("reducible chain is reported as non-unique") {
    CHECK_THROWS_AS(stationary_distribution(Eigen::MatrixXd::Identity(3, 3)), NumericalError);
}

TEST_CASE("working transform reference values") {
    Eigen::VectorXd row(2);
    row << 0.5, 0.5;
    double w[1];
    row_to_working(row, 0, w);
    CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-15));

    row << 0.8, 0.2;
    row_to_working(row, 0, w);
    CHECK(w[0] == doctest::Approx(-1.3862944).epsilon(1e-6)); // log(0.2/0.8)
}

TEST_CASE("study matrix round-trips through the working scale") {
    const Eigen::MatrixXd tpm = oracle::study_tpm();
    const Eigen::MatrixXd back = working_to_tpm(tpm_to_working(tpm), 4);
    CHECK((back - tpm).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero entries are floored with a flag before the log transform") {
    Eigen::MatrixXd tpm(2, 2);
    tpm << 1.0, 0.0, 0.3, 0.7;
    bool floored = false;
    const Eigen::VectorXd w = tpm_to_working(tpm, &floored);
    CHECK(floored);
    const Eigen::MatrixXd back = working_to_tpm(w, 2);
    CHECK(is_row_stochastic(back, 1e-12));
    CHECK(back(0, 1) == doctest::Approx(1e-12).epsilon(1e-3));
}

TEST_CASE("round-trip and stationary invariance on random matrices") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 2 + static_cast<int>(rng() % 5);
        const Eigen::MatrixXd tpm = oracle::random_tpm(dim, rng);
        const Eigen::VectorXd w = tpm_to_working(tpm);
        const Eigen::MatrixXd back = working_to_tpm(w, dim);

        CHECK((back - tpm).cwiseAbs().maxCoeff() < 1e-10);
        for (int i = 0; i < dim; ++i) {
            CHECK(std::abs(back.row(i).sum() - 1.0) <= 1e-12);
            CHECK((back.row(i).array() >= 0).all());
        }
        const Eigen::VectorXd d1 = stationary_distribution(tpm);
        const Eigen::VectorXd d2 = stationary_distribution(back);
        CHECK((d1 - d2).cwiseAbs().maxCoeff() < 1e-8);
    }
}
