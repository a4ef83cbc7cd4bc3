#include "episarsa/norms.hpp"
#include "episarsa/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace episarsa;

TEST_CASE("vector norms: textbook values") {
    Eigen::VectorXd v(2);
    v << 3.0, 4.0;
    CHECK(norm(v, VectorNorm::euclidean) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(norm(v, VectorNorm::one) == doctest::Approx(7.0));
    CHECK(norm(v, VectorNorm::infinity_) == doctest::Approx(4.0));
}

TEST_CASE("spectral norm of the identity is 1") {
    CHECK(spectral_norm(Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral norm matches singular values on random matrices") {
    std::mt19937_64 rng = stream_rng(42, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 6);
        const int n = 1 + static_cast<int>(rng() % 6);
        Eigen::MatrixXd a(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = 2.0 * uniform01(rng) - 1.0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        CHECK(spectral_norm(a) ==
              doctest::Approx(svd.singularValues().maxCoeff()).epsilon(1e-8));
    }
}

TEST_CASE("norm equivalences hold on random matrices") {
    std::mt19937_64 rng = stream_rng(43, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 8);
        const int n = 1 + static_cast<int>(rng() % 8);
        Eigen::MatrixXd a(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = 4.0 * uniform01(rng) - 2.0;
        const double spec = norm(a, MatrixNorm::spectral);
        CHECK(spec <= std::sqrt(double(m) * n) * norm(a, MatrixNorm::max) + 1e-10);
        CHECK(spec <= std::sqrt(double(m)) * norm(a, MatrixNorm::infinity_) + 1e-10);
    }
}

TEST_CASE("vector norm chain ||x||_inf <= ||x|| <= ||x||_1") {
    std::mt19937_64 rng = stream_rng(44, 0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(1 + static_cast<int>(rng() % 10));
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 10.0 * uniform01(rng) - 5.0;
        const double inf = norm(x, VectorNorm::infinity_);
        const double two = norm(x, VectorNorm::euclidean);
        const double one = norm(x, VectorNorm::one);
        CHECK(inf <= two + 1e-12);
        CHECK(two <= one + 1e-12);
    }
}

TEST_CASE("spectral radius estimate: absorbing vs recurrent") {
    Eigen::MatrixXd sub(2, 2);
    sub << 0.0, 0.0, 0.25, 0.25; // eigenvalues 0 and 0.25
    CHECK(nonnegative_spectral_radius(sub) == doctest::Approx(0.25).epsilon(1e-9));

    Eigen::MatrixXd stoch(2, 2);
    stoch << 0.5, 0.5, 0.5, 0.5;
    CHECK(nonnegative_spectral_radius(stoch) == doctest::Approx(1.0).epsilon(1e-9));

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    CHECK(nonnegative_spectral_radius(zero) == doctest::Approx(0.0));
}
