#include "episarsa/mdp.hpp"
#include "episarsa/mdp_io.hpp"

#include "episarsa/chain_analysis.hpp"
#include "episarsa/errors.hpp"
#include "support/test_mdps.hpp"

#include <doctest.h>

using namespace episarsa;
using namespace episarsa::testing;

TEST_CASE("one-shot validates cleanly") {
    CHECK(validate(one_shot()).empty());
}

TEST_CASE("row sum below one without a sink flag is reported") {
    MdpSpec spec({"s0"}, {"t"}, {"a0"}, {{"s0", "a0", "t", 0.8}}, {}, {{"s0", 1.0}});
    const auto report = validate(spec);
    REQUIRE_FALSE(report.empty());
    bool found = false;
    for (const auto& v : report) found = found || v.message.find("row sum < 1") != std::string::npos;
    CHECK(found);
}

TEST_CASE("row sum below one with a sink flag is routed and valid") {
    MdpSpec spec({"s0"}, {"t"}, {"a0"}, {{"s0", "a0", "t", 0.8}}, {}, {{"s0", 1.0}}, "t");
    CHECK(validate(spec).empty());
    CHECK(spec.transition_prob(0, 0, 1) == doctest::Approx(1.0));
}

TEST_CASE("chain-1 validates cleanly") {
    CHECK(validate(chain1()).empty());
}

TEST_CASE("unknown identifiers are reported with location") {
    MdpSpec spec({"s0"}, {"t"}, {"a0"}, {{"s0", "bogus", "t", 1.0}}, {}, {{"s0", 1.0}});
    const auto report = validate(spec);
    REQUIRE_FALSE(report.empty());
    CHECK(report[0].message.find("bogus") != std::string::npos);
}

TEST_CASE("negative probabilities and bad initial mass are reported") {
    MdpSpec spec({"s0"}, {"t"}, {"a0"}, {{"s0", "a0", "t", -0.5}, {"s0", "a0", "s0", 1.5}}, {},
                 {{"s0", 0.5}});
    const auto report = validate(spec);
    bool neg = false, init = false;
    for (const auto& v : report) {
        neg = neg || v.message.find("negative probability") != std::string::npos;
        init = init || v.location == "initial";
    }
    CHECK(neg);
    CHECK(init);
}

TEST_CASE("unreachable transient states are reported") {
    MdpSpec spec({"s0", "island"}, {"t"}, {"a0"},
                 {{"s0", "a0", "t", 1.0}, {"island", "a0", "t", 1.0}}, {}, {{"s0", 1.0}});
    const auto report = validate(spec);
    REQUIRE_FALSE(report.empty());
    CHECK(report[0].location.find("island") != std::string::npos);
}

TEST_CASE("expected reward: hand values") {
    const MdpSpec spec = chain1();
    const ExpectedReward r = expected_reward(spec);
    CHECK(r.r_bar[spec.pair_index(0, 0)] == doctest::Approx(1.0));
    CHECK(r.r_bar[spec.pair_index(0, 1)] == doctest::Approx(1.0)); // 0.5*0 + 0.5*2

    const MdpSpec one = one_shot();
    CHECK(expected_reward(one).r_bar[0] == doctest::Approx(1.0));
}

TEST_CASE("expected reward of a zero reward table is zero") {
    MdpSpec spec({"s0"}, {"t"}, {"a0"}, {{"s0", "a0", "t", 1.0}}, {}, {{"s0", 1.0}});
    CHECK(expected_reward(spec).r_bar.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expected reward is linear in the reward table") {
    auto with_rewards = [](double r1, double r2) {
        return MdpSpec({"s0"}, {"t"}, {"a0", "a1"},
                       {{"s0", "a0", "t", 1.0}, {"s0", "a1", "s0", 0.5}, {"s0", "a1", "t", 0.5}},
                       {{"s0", "a0", "t", r1}, {"s0", "a1", "t", r2}}, {{"s0", 1.0}});
    };
    const Eigen::VectorXd a = expected_reward(with_rewards(1.0, 2.0)).r_bar;
    const Eigen::VectorXd b = expected_reward(with_rewards(0.5, -1.0)).r_bar;
    const Eigen::VectorXd sum = expected_reward(with_rewards(1.5, 1.0)).r_bar;
    CHECK((a + b - sum).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("discount transform: self-loop becomes proper with mean time 1/(1-gamma)") {
    const MdpSpec transformed = discount_transform(self_loop(), 0.9);
    CHECK(validate(transformed).empty());
    CHECK(transformed.transition_prob(0, 0, 0) == doctest::Approx(0.9));
    const PolicyTable pi = PolicyTable::uniform(1, 1);
    const ChainAnalysis ca(transformed, pi);
    CHECK(ca.t_vec()[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("discount transform: one-shot splits mass") {
    const MdpSpec transformed = discount_transform(one_shot(), 0.5);
    CHECK(transformed.transition_prob(0, 0, 1) == doctest::Approx(0.5)); // t
    CHECK(transformed.transition_prob(0, 0, 2) == doctest::Approx(0.5)); // sink
    CHECK(transformed.num_terminal() == 2);
}

TEST_CASE("discount transform output validates for random gammas and instances") {
    for (const auto& spec : {one_shot(), chain1(), gridlet4(), self_loop()})
        for (double gamma : {0.1, 0.5, 0.9, 0.99})
            CHECK(validate(discount_transform(spec, gamma)).empty());
}

TEST_CASE("discount transform rejects gamma outside (0,1)") {
    CHECK_THROWS_AS(discount_transform(one_shot(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(discount_transform(one_shot(), 1.0), std::invalid_argument);
}

TEST_CASE("transformed rows keep at most gamma transient mass") {
    for (double gamma : {0.5, 0.9}) {
        const MdpSpec transformed = discount_transform(gridlet4(), gamma);
        for (int s = 0; s < transformed.num_transient(); ++s)
            for (int a = 0; a < transformed.num_actions(); ++a) {
                double transient_mass = 0.0;
                for (int sn = 0; sn < transformed.num_transient(); ++sn)
                    transient_mass += transformed.transition_prob(s, a, sn);
                CHECK(transient_mass <= gamma + 1e-12);
            }
    }
}

TEST_CASE("policy table enforces row sums and the floor") {
    Eigen::MatrixXd bad(1, 2);
    bad << 0.6, 0.6;
    CHECK_THROWS_AS(PolicyTable(bad, 0.0), std::invalid_argument);

    Eigen::MatrixXd low(1, 2);
    low << 0.99, 0.01;
    CHECK_THROWS_AS(PolicyTable(low, 0.05), std::invalid_argument);
    CHECK_NOTHROW(PolicyTable(low, 0.01));
}

TEST_CASE("mdp json round trip") {
    const MdpSpec spec = chain1();
    const MdpSpec reloaded = load_mdp_json(mdp_to_json(spec));
    CHECK(validate(reloaded).empty());
    CHECK(reloaded.num_pairs() == spec.num_pairs());
    for (int s = 0; s < spec.num_transient(); ++s)
        for (int a = 0; a < spec.num_actions(); ++a)
            CHECK((reloaded.transition_row(s, a) - spec.transition_row(s, a)).norm() == 0.0);
}

TEST_CASE("mdp parser rejects unknown keys") {
    CHECK_THROWS_AS(load_mdp_json(R"({"states":["s"],"terminals":["t"],"actions":["a"],"bogus":1})"),
                    ParseError);
    CHECK_THROWS_AS(
        load_mdp_json(
            R"({"states":["s"],"terminals":["t"],"actions":["a"],"transitions":[{"s":"s","a":"a","s_next":"t","p":1,"weird":2}]})"),
        ParseError);
}

TEST_CASE("mdp parser accepts the documented schema") {
    const MdpSpec spec = load_mdp_json(R"({
      "states": ["s0"],
      "terminals": ["t"],
      "actions": ["a0", "a1"],
      "transitions": [
        {"s": "s0", "a": "a0", "s_next": "t", "p": 1.0},
        {"s": "s0", "a": "a1", "s_next": "s0", "p": 0.5},
        {"s": "s0", "a": "a1", "s_next": "t", "p": 0.5}
      ],
      "rewards": [
        {"s": "s0", "a": "a0", "s_next": "t", "r": 1.0},
        {"s": "s0", "a": "a1", "s_next": "t", "r": 2.0}
      ],
      "initial": [{"s": "s0", "p": 1.0}]
    })");
    CHECK(validate(spec).empty());
    CHECK(spec.r_max() == doctest::Approx(2.0));
}
