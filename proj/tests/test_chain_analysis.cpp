#include "episarsa/chain_analysis.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/policy_family.hpp"
#include "support/test_mdps.hpp"

#include <doctest.h>

using namespace episarsa;
using namespace episarsa::testing;

TEST_CASE("one-shot: trivial chain quantities") {
    const MdpSpec spec = one_shot();
    const ChainAnalysis ca(spec, PolicyTable::uniform(1, 1));
    CHECK(ca.eta_pi()[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ca.lambda_pi()[0] == doctest::Approx(1.0));
    CHECK(ca.t_vec()[0] == doctest::Approx(1.0));
    CHECK(ca.var_vec()[0] == doctest::Approx(0.0));
    CHECK(absorption_second_moment(ca) == doctest::Approx(1.0));
}

TEST_CASE("chain-1 uniform: hand-solved eta, t, var, second moment") {
    const MdpSpec spec = chain1();
    const ChainAnalysis ca(spec, PolicyTable::uniform(1, 2));

    // eta = lambda_pi + P^T eta solved by hand on the 2x2 system
    CHECK(ca.eta_pi()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(ca.eta_pi()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(ca.eta_pi().sum() == doctest::Approx(4.0 / 3.0).epsilon(1e-12)); // = E[T]

    // N = [[1,0],[1/3,4/3]] by Kemeny-Snell
    CHECK(ca.fundamental()(0, 0) == doctest::Approx(1.0));
    CHECK(ca.fundamental()(0, 1) == doctest::Approx(0.0));
    CHECK(ca.fundamental()(1, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(ca.fundamental()(1, 1) == doctest::Approx(4.0 / 3.0));

    CHECK(ca.t_vec()[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ca.t_vec()[1] == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(ca.var_vec()[0] == doctest::Approx(0.0));
    CHECK(ca.var_vec()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // (2N - I) t = (1, 31/9), E[Gamma^2] = 0.5*1 + 0.5*31/9 = 20/9
    CHECK(absorption_second_moment(ca) == doctest::Approx(20.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("eta recursion and elementwise bounds hold for sampled policies") {
    for (const auto& spec : {chain1(), gridlet4()}) {
        for (int k = 0; k < 50; ++k) {
            const PolicyTable pi = sample_delta_eps(spec, 0.05, 900 + static_cast<std::uint64_t>(k));
            const ChainAnalysis ca(spec, pi);
            const Eigen::VectorXd residual =
                ca.eta_pi() - (ca.lambda_pi() + ca.p_pi().transpose() * ca.eta_pi());
            CHECK(residual.lpNorm<Eigen::Infinity>() < 1e-10);
            CHECK(((ca.eta_pi() - ca.lambda_pi()).array() >= -1e-12).all());
            CHECK((ca.lambda_pi().array() >= 0.0).all());
            CHECK((ca.t_vec().array() >= 1.0 - 1e-12).all());
            CHECK((ca.var_vec().array() >= -1e-10).all());
            CHECK((ca.eta_pi().array() > 0.0).all()); // Assumption 4 + eps-softness
        }
    }
}

TEST_CASE("truncated Neumann series matches the solved fundamental matrix") {
    for (const auto& spec : {one_shot(), chain1(), gridlet4()}) {
        const PolicyTable pi = PolicyTable::uniform(spec.num_transient(), spec.num_actions());
        const ChainAnalysis ca(spec, pi);
        const int n = ca.num_pairs();
        Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
        for (int k = 1; k <= 200; ++k) {
            power = power * ca.p_pi();
            sum += power;
        }
        CHECK((sum - ca.fundamental()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("improper chain is rejected") {
    const MdpSpec spec = self_loop();
    CHECK_THROWS_AS(ChainAnalysis(spec, PolicyTable::uniform(1, 1)), AssumptionError);
}

TEST_CASE("contraction coefficients on chain-1") {
    const MdpSpec spec = chain1();
    const ChainAnalysis ca(spec, PolicyTable::uniform(1, 2));
    CHECK(contraction_coefficient(ca, ContractionCase::case_ii) ==
          doctest::Approx(0.5).epsilon(1e-12));
    // beta_i = 1 - min(0.5 / (2/3)) = 1/4
    CHECK(contraction_coefficient(ca, ContractionCase::case_i) ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("contraction coefficient: one-shot case ii is zero") {
    const ChainAnalysis ca(one_shot(), PolicyTable::uniform(1, 1));
    CHECK(contraction_coefficient(ca, ContractionCase::case_ii) == doctest::Approx(0.0));
}

TEST_CASE("contraction coefficient errors when the case hypothesis fails") {
    // gridlet rows that keep all mass on transient states break case ii
    const MdpSpec grid = gridlet4();
    const ChainAnalysis ca(grid, PolicyTable::uniform(4, 4));
    CHECK_THROWS_AS(contraction_coefficient(ca, ContractionCase::case_ii), AssumptionError);

    // a start distribution with a zero entry breaks case i
    MdpSpec two_state({"s0", "s1"}, {"t"}, {"a0"},
                      {{"s0", "a0", "s1", 1.0}, {"s1", "a0", "t", 1.0}}, {}, {{"s0", 1.0}});
    const ChainAnalysis ca2(two_state, PolicyTable::uniform(2, 1));
    CHECK_THROWS_AS(contraction_coefficient(ca2, ContractionCase::case_i), AssumptionError);
}

TEST_CASE("weighted norm: hand values and dimension check") {
    const MdpSpec spec = chain1();
    const ChainAnalysis ca(spec, PolicyTable::uniform(1, 2));
    CHECK(weighted_norm(Eigen::VectorXd::Zero(2), ca) == doctest::Approx(0.0));
    CHECK(weighted_norm(Eigen::VectorXd::Ones(2), ca) ==
          doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(weighted_norm(Eigen::VectorXd::Ones(3), ca), std::invalid_argument);
}

TEST_CASE("P_pi contracts the weighted norm at the case-ii coefficient") {
    const MdpSpec spec = chain1();
    std::mt19937_64 rng = stream_rng(77, 0);
    for (int p = 0; p < 20; ++p) {
        const PolicyTable pi = sample_delta_eps(spec, 0.05, 500 + static_cast<std::uint64_t>(p));
        const ChainAnalysis ca(spec, pi);
        const double beta = contraction_coefficient(ca, ContractionCase::case_ii);
        for (int k = 0; k < 100; ++k) {
            Eigen::VectorXd q(2);
            q << 10.0 * uniform01(rng) - 5.0, 10.0 * uniform01(rng) - 5.0;
            CHECK(weighted_norm(ca.p_pi() * q, ca) <= beta * weighted_norm(q, ca) + 1e-10);
        }
    }
}

TEST_CASE("analytic absorption moments match Monte-Carlo episodes") {
    const MdpSpec spec = chain1();
    const PolicyTable pi = PolicyTable::uniform(1, 2);
    const ChainAnalysis ca(spec, pi);

    RunningStats steps, steps_sq;
    std::mt19937_64 rng = stream_rng(123456, 0);
    const long episodes = 200000;
    for (long e = 0; e < episodes; ++e) {
        const MiniEpisode ep = mini_episode(spec, pi, rng);
        steps.add(static_cast<double>(ep.steps));
        steps_sq.add(static_cast<double>(ep.steps) * static_cast<double>(ep.steps));
    }
    const double expected_t = ca.lambda_pi().dot(ca.t_vec());
    const double expected_t2 = absorption_second_moment(ca);
    CHECK(std::abs(steps.mean() - expected_t) <= 3.0 * steps.std_error());
    CHECK(std::abs(steps_sq.mean() - expected_t2) <= 3.0 * steps_sq.std_error());
}
