#include "episarsa/policy_family.hpp"

#include "episarsa/errors.hpp"
#include "support/test_mdps.hpp"

#include <doctest.h>

using namespace episarsa;
using namespace episarsa::testing;

TEST_CASE("constant family ignores theta and has Lipschitz estimate 0") {
    const PolicyTable base = PolicyTable::uniform(1, 2);
    const PolicyFamily family = PolicyFamily::constant(base, 0.5);
    const FeatureMatrix phi = FeatureMatrix::tabular(2);

    std::mt19937_64 rng = stream_rng(61, 0);
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd theta(2);
        theta << 100.0 * uniform01(rng), -100.0 * uniform01(rng);
        CHECK((family.evaluate(theta, phi, 1, 2).matrix() - base.matrix()).norm() == 0.0);
    }
    CHECK(estimate_lipschitz(family, phi, 1, 2, 64, 10.0, 1) == 0.0);
}

TEST_CASE("softmax at theta = 0 is uniform") {
    const PolicyFamily family = PolicyFamily::softmax(0.05, 1.0);
    const FeatureMatrix phi = FeatureMatrix::tabular(8);
    const PolicyTable pi = family.evaluate(Eigen::VectorXd::Zero(8), phi, 2, 4);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 4; ++a) CHECK(pi.prob(s, a) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("softmax entries approach uniform monotonically in temperature") {
    const FeatureMatrix phi = FeatureMatrix::tabular(2);
    Eigen::VectorXd theta(2);
    theta << 1.0, -1.0;
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const PolicyFamily family = PolicyFamily::softmax(0.05, tau);
        const PolicyTable pi = family.evaluate(theta, phi, 1, 2);
        const double gap = std::abs(pi.prob(0, 0) - 0.5);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("softmax stays in the epsilon-soft polytope for extreme theta") {
    const PolicyFamily family = PolicyFamily::softmax(0.1, 1.0);
    const MdpSpec spec = gridlet4();
    const FeatureMatrix phi = FeatureMatrix::tabular(16);
    std::mt19937_64 rng = stream_rng(62, 0);
    for (int k = 0; k < 10000; ++k) {
        Eigen::VectorXd theta(16);
        for (int i = 0; i < 16; ++i) theta[i] = 1000.0 * (2.0 * uniform01(rng) - 1.0);
        // PolicyTable construction re-checks row sums (1e-12) and the floor
        const PolicyTable pi = family.evaluate(theta, phi, 4, 4);
        for (int s = 0; s < 4; ++s) {
            CHECK(std::abs(pi.matrix().row(s).sum() - 1.0) <= 1e-12);
            for (int a = 0; a < 4; ++a) CHECK(pi.prob(s, a) >= 0.1);
        }
    }
}

TEST_CASE("softmax rejects infeasible epsilon") {
    const PolicyFamily family = PolicyFamily::softmax(0.3, 1.0);
    const FeatureMatrix phi = FeatureMatrix::tabular(8);
    CHECK_THROWS_AS(family.evaluate(Eigen::VectorXd::Zero(8), phi, 2, 4), AssumptionError);
}

TEST_CASE("directional difference quotients respect the closed-form slope bound") {
    // ||dpi/dtheta|| <= (1 - |A| eps) ||Phi||_F / (2 tau), since the softmax
    // Jacobian has spectral norm at most 1/2
    const MdpSpec spec = chain1();
    const FeatureMatrix phi = FeatureMatrix::tabular(2);
    std::mt19937_64 rng = stream_rng(63, 0);
    for (double tau : {0.5, 2.0}) {
        const PolicyFamily family = PolicyFamily::softmax(0.05, tau);
        const double bound = (1.0 - 2 * 0.05) * phi.matrix().norm() / (2.0 * tau);
        for (int k = 0; k < 200; ++k) {
            Eigen::VectorXd theta(2), dir(2);
            for (int i = 0; i < 2; ++i) {
                theta[i] = 10.0 * (2.0 * uniform01(rng) - 1.0);
                dir[i] = standard_normal(rng);
            }
            if (dir.norm() == 0.0) continue;
            dir.normalize();
            const double h = std::pow(10.0, -1.0 - 4.0 * uniform01(rng));
            const PolicyTable p1 = family.evaluate(theta, phi, 1, 2);
            const PolicyTable p2 = family.evaluate(theta + h * dir, phi, 1, 2);
            const double quotient = (p1.matrix() - p2.matrix()).norm() / h;
            CHECK(quotient <= bound * (1.0 + 1e-6) + 1e-9);
        }
    }
}

TEST_CASE("Lipschitz estimate decreases in temperature and halves when tau doubles") {
    const FeatureMatrix phi = FeatureMatrix::tabular(2);
    std::vector<double> estimates;
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const PolicyFamily family = PolicyFamily::softmax(0.05, tau);
        estimates.push_back(estimate_lipschitz(family, phi, 1, 2, 512, 10.0, 99));
    }
    for (std::size_t i = 1; i < estimates.size(); ++i) CHECK(estimates[i] <= estimates[i - 1]);
    for (std::size_t i = 1; i < estimates.size(); ++i) {
        const double ratio = estimates[i - 1] / estimates[i];
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
    }
}

TEST_CASE("delta-eps sampler: validity, degenerate epsilon, determinism") {
    const MdpSpec spec = gridlet4();
    for (int k = 0; k < 1000; ++k)
        CHECK_NOTHROW(sample_delta_eps(spec, 0.05, static_cast<std::uint64_t>(k)));

    // eps = 1/|A|: the polytope degenerates to the uniform policy
    const PolicyTable uniform = sample_delta_eps(spec, 0.25, 5);
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 4; ++a) CHECK(uniform.prob(s, a) == doctest::Approx(0.25).epsilon(1e-14));

    const PolicyTable p1 = sample_delta_eps(spec, 0.05, 17);
    const PolicyTable p2 = sample_delta_eps(spec, 0.05, 17);
    CHECK((p1.matrix() - p2.matrix()).norm() == 0.0);
    const PolicyTable p3 = sample_delta_eps(spec, 0.05, 18);
    CHECK((p1.matrix() - p3.matrix()).norm() > 0.0);

    CHECK_THROWS_AS(sample_delta_eps(spec, 0.3, 1), AssumptionError);
}

TEST_CASE("eps-greedy demo family is eps/|A|-soft but discontinuous") {
    const PolicyFamily family = PolicyFamily::eps_greedy_demo(0.2);
    const FeatureMatrix phi = FeatureMatrix::tabular(2);
    Eigen::VectorXd theta(2);
    theta << 1.0, 0.99;
    const PolicyTable p1 = family.evaluate(theta, phi, 1, 2);
    CHECK(p1.prob(0, 0) == doctest::Approx(0.9));
    CHECK(p1.prob(0, 1) == doctest::Approx(0.1));
    theta << 0.99, 1.0; // tiny theta change flips the greedy action
    const PolicyTable p2 = family.evaluate(theta, phi, 1, 2);
    CHECK(p2.prob(0, 1) == doctest::Approx(0.9));
}
