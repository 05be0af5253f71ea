#include "doctest.h"

#include <random>

#include "chmm/coupling.hpp"
#include "chmm/transition.hpp"
#include "oracles.hpp"

using namespace chmm;

namespace {

// Random conditional-independence marginals: each row a random distribution.
CondIndepMarginals random_marginals(const StateSpace& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    CondIndepMarginals marginals(space.num_chains,
                                 Eigen::MatrixXd(space.product_dim(), space.states_per_chain));
    for (auto& block : marginals) {
        for (Eigen::Index i = 0; i < block.rows(); ++i) {
            for (Eigen::Index j = 0; j < block.cols(); ++j) block(i, j) = unit(rng);
            block.row(i) /= block.row(i).sum();
        }
    }
    return marginals;
}

} // namespace

TEST_CASE("cartesian builder is the identity construction") {
    StateSpace space(2, 2);
    const Eigen::MatrixXd tpm = oracle::study_tpm();
    CHECK((build_cartesian(tpm, space) - tpm).cwiseAbs().maxCoeff() == 0.0);
    CHECK((build_cartesian(Eigen::MatrixXd::Identity(4, 4), space) -
           Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK_THROWS_AS(build_cartesian(Eigen::MatrixXd::Identity(3, 3), space), ConfigError);
}

TEST_CASE("independent chains give the Kronecker product") {
    StateSpace space(2, 2);
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 0.9, 0.1, 0.2, 0.8;
    b << 0.7, 0.3, 0.4, 0.6;
    const Eigen::MatrixXd product = build_independent({a, b}, space);
    CHECK(product(0, 0) == doctest::Approx(0.63).epsilon(1e-12)); // (1,1)->(1,1)

    // Full check by independent enumeration of the product formula.
    for (int prev = 0; prev < 4; ++prev) {
        for (int next = 0; next < 4; ++next) {
            const double expected = a(chain_state_of(prev, 0, space), chain_state_of(next, 0, space)) *
                                    b(chain_state_of(prev, 1, space), chain_state_of(next, 1, space));
            CHECK(product(prev, next) == doctest::Approx(expected).epsilon(1e-14));
        }
    }

    // Stationary distribution factorizes as the outer product.
    const Eigen::VectorXd da = stationary_distribution(a);
    const Eigen::VectorXd db = stationary_distribution(b);
    const Eigen::VectorXd dp = stationary_distribution(product);
    for (int k = 0; k < 4; ++k) {
        CHECK(dp(k) == doctest::Approx(da(chain_state_of(k, 0, space)) *
                                       db(chain_state_of(k, 1, space)))
                           .epsilon(1e-10));
    }

    // Identity chains produce the product identity.
    const Eigen::MatrixXd eye = build_independent(
        {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)}, space);
    CHECK((eye - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chain-only marginals collapse cond_indep to independence") {
    StateSpace space(2, 2);
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 0.9, 0.1, 0.2, 0.8;
    b << 0.7, 0.3, 0.4, 0.6;
    CondIndepMarginals marginals(2, Eigen::MatrixXd(4, 2));
    for (int prev = 0; prev < 4; ++prev) {
        marginals[0].row(prev) = a.row(chain_state_of(prev, 0, space));
        marginals[1].row(prev) = b.row(chain_state_of(prev, 1, space));
    }
    const Eigen::MatrixXd via_ci = build_cond_indep(marginals, space);
    const Eigen::MatrixXd via_indep = build_independent({a, b}, space);
    CHECK((via_ci - via_indep).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mixture weights at the identity reproduce independence") {
    StateSpace space(2, 2);
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 0.9, 0.1, 0.2, 0.8;
    b << 0.7, 0.3, 0.4, 0.6;
    PairwiseMarginals pairs(2, std::vector<Eigen::MatrixXd>(2));
    pairs[0][0] = a;
    pairs[1][1] = b;
    pairs[0][1] = Eigen::MatrixXd::Constant(2, 2, 0.5);
    pairs[1][0] = Eigen::MatrixXd::Constant(2, 2, 0.5);
    const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd built = build_mixture_weight(pairs, w, space);
    CHECK((built - build_independent({a, b}, space)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mixture of identical components is that component") {
    StateSpace space(2, 2);
    Eigen::MatrixXd common(2, 2);
    common << 0.8, 0.2, 0.3, 0.7;
    PairwiseMarginals pairs(2, std::vector<Eigen::MatrixXd>(2, common));
    Eigen::MatrixXd w(2, 2);
    w << 0.5, 0.5, 0.5, 0.5;
    const auto marginals = mixture_to_cond_indep(pairs, w, space);
    for (int prev = 0; prev < 4; ++prev) {
        // Chain 1's marginal row equals the common TPM's row only when both
        // source states agree; with weight 0.5/0.5 it is the average.
        const Eigen::RowVectorXd expected =
            0.5 * common.row(chain_state_of(prev, 0, space)) +
            0.5 * common.row(chain_state_of(prev, 1, space));
        CHECK((marginals[0].row(prev) - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("single chain builder validates and passes through") {
    StateSpace space(2, 2);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    CHECK((build_single_chain(eye, space) - eye).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(build_single_chain(Eigen::MatrixXd::Identity(4, 4), space), ConfigError);
    CHECK(run_dim(CouplingKind::SingleChain, space) == 2);
    CHECK(run_dim(CouplingKind::CartesianFull, space) == 4);
}

TEST_CASE("free parameter counts match the M=3, N=3 reference values") {
    StateSpace space(3, 3);
    CHECK(count_parameters(CouplingKind::CartesianFull, space) == 702);
    CHECK(count_parameters(CouplingKind::CondIndep, space) == 162);
    CHECK(count_parameters(CouplingKind::MixtureWeight, space) == 60);
    CHECK(count_parameters(CouplingKind::IndependentChains, space) == 18);
    CHECK(count_parameters(CouplingKind::SingleChain, space) == 6);
}

TEST_CASE("every builder output is row-stochastic on random inputs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 2);
        const int n = 2 + static_cast<int>(rng() % 2);
        StateSpace space(m, n);

        std::vector<Eigen::MatrixXd> chains;
        for (int c = 0; c < m; ++c) chains.push_back(oracle::random_tpm(n, rng));
        CHECK(is_row_stochastic(build_independent(chains, space), 1e-12));

        CHECK(is_row_stochastic(build_cond_indep(random_marginals(space, rng), space), 1e-12));

        PairwiseMarginals pairs(m, std::vector<Eigen::MatrixXd>(m));
        for (int c = 0; c < m; ++c) {
            for (int src = 0; src < m; ++src) pairs[c][src] = oracle::random_tpm(n, rng);
        }
        const Eigen::MatrixXd w = oracle::random_tpm(m, rng); // rows are distributions
        CHECK(is_row_stochastic(build_mixture_weight(pairs, w, space), 1e-12));
    }
}
