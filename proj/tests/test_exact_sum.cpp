#include "episarsa/exact_sum.hpp"
#include "episarsa/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace episarsa;

TEST_CASE("exact scalar sum is order independent") {
    std::mt19937_64 rng = stream_rng(7, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<double, double>> products;
        const int count = 2 + static_cast<int>(rng() % 40);
        for (int i = 0; i < count; ++i) {
            const double a = (2.0 * uniform01(rng) - 1.0) * std::pow(10.0, double(rng() % 13) - 6.0);
            const double b = 2.0 * uniform01(rng) - 1.0;
            products.emplace_back(a, b);
        }
        ExactScalarSum forward, backward, shuffled;
        for (const auto& [a, b] : products) forward.add_product(a, b);
        for (auto it = products.rbegin(); it != products.rend(); ++it)
            backward.add_product(it->first, it->second);
        std::shuffle(products.begin(), products.end(), rng);
        for (const auto& [a, b] : products) shuffled.add_product(a, b);
        CHECK(forward.value() == backward.value());
        CHECK(forward.value() == shuffled.value());
    }
}

TEST_CASE("count multiplication equals repeated addition exactly") {
    std::mt19937_64 rng = stream_rng(8, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = (2.0 * uniform01(rng) - 1.0) * 3.7;
        const double b = 2.0 * uniform01(rng) - 1.0;
        const long count = 1 + static_cast<long>(rng() % 17);
        ExactScalarSum repeated, multiplied;
        for (long i = 0; i < count; ++i) repeated.add_product(a, b);
        multiplied.add_product(static_cast<double>(count), a, b);
        CHECK(repeated.value() == multiplied.value());
    }
}

TEST_CASE("cancellation that plain summation gets wrong") {
    // 1e100 + 1 - 1e100 = 1, lost entirely in naive double accumulation
    ExactScalarSum acc;
    acc.add(1e100);
    acc.add(1.0);
    acc.add(-1e100);
    CHECK(acc.value() == 1.0);
}

TEST_CASE("vector accumulator rounds per component") {
    ExactVectorSum acc(2);
    acc.add_product(0, 0.1, 0.2);
    acc.add_product(1, 3.0, 0.5, 0.5);
    const Eigen::VectorXd v = acc.rounded();
    CHECK(v[0] == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.75).epsilon(1e-15));
}
