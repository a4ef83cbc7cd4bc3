#include "episarsa/certification.hpp"
#include "episarsa/chain_analysis.hpp"
#include "episarsa/linear_fa.hpp"
#include "episarsa/policy_family.hpp"
#include "episarsa/rng.hpp"
#include "episarsa/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace episarsa;

namespace {

MdpSpec gridlet() {
    // same 2x2 gridlet the tests use; kept local so the benchmark target has
    // no dependency on test sources
    const std::vector<std::string> cells = {"g00", "g01", "g10", "g11"};
    std::vector<MdpSpec::TransitionEntry> transitions;
    std::vector<MdpSpec::RewardEntry> rewards;
    std::vector<MdpSpec::InitialEntry> initial;
    const std::vector<std::string> actions = {"right", "down", "left", "up"};
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 2; ++col) {
            const std::string& here = cells[static_cast<std::size_t>(2 * row + col)];
            initial.push_back({here, 0.25});
            for (int a = 0; a < 4; ++a) {
                int tr = row, tc = col;
                bool exits = false, bumps = false;
                if (a == 0) { exits = (col == 1); tc = col + 1; }
                if (a == 1) { exits = (row == 1); tr = row + 1; }
                if (a == 2) { bumps = (col == 0); tc = col - 1; }
                if (a == 3) { bumps = (row == 0); tr = row - 1; }
                const std::string& act = actions[static_cast<std::size_t>(a)];
                if (exits) {
                    transitions.push_back({here, act, "exit", 0.8});
                    transitions.push_back({here, act, here, 0.2});
                    rewards.push_back({here, act, "exit", 1.0});
                    rewards.push_back({here, act, here, -0.1});
                } else if (bumps) {
                    transitions.push_back({here, act, here, 1.0});
                    rewards.push_back({here, act, here, -0.1});
                } else {
                    const std::string& target = cells[static_cast<std::size_t>(2 * tr + tc)];
                    transitions.push_back({here, act, target, 0.8});
                    transitions.push_back({here, act, here, 0.2});
                    rewards.push_back({here, act, target, -0.1});
                    rewards.push_back({here, act, here, -0.1});
                }
            }
        }
    return MdpSpec(cells, {"exit"}, actions, transitions, rewards, initial);
}

void bm_analyze(benchmark::State& state) {
    const MdpSpec spec = gridlet();
    const PolicyTable pi = PolicyTable::uniform(4, 4);
    for (auto _ : state) {
        const ChainAnalysis ca(spec, pi);
        benchmark::DoNotOptimize(ca.eta_pi());
    }
}
BENCHMARK(bm_analyze);

void bm_assemble(benchmark::State& state) {
    const MdpSpec spec = gridlet();
    const PolicyTable pi = PolicyTable::uniform(4, 4);
    const ChainAnalysis ca(spec, pi);
    const FeatureMatrix phi = FeatureMatrix::tabular(16);
    for (auto _ : state) {
        const TdSystem sys = assemble(spec, phi, ca);
        benchmark::DoNotOptimize(sys.theta_pi);
    }
}
BENCHMARK(bm_assemble);

void bm_simulate_episode(benchmark::State& state) {
    const MdpSpec spec = gridlet();
    const PolicyTable pi = PolicyTable::uniform(4, 4);
    std::uint64_t episode = 0;
    for (auto _ : state) {
        std::mt19937_64 rng = stream_rng(1, episode++);
        benchmark::DoNotOptimize(simulate_episode(spec, pi, rng).length());
    }
}
BENCHMARK(bm_simulate_episode);

void bm_h_of(benchmark::State& state) {
    const MdpSpec spec = gridlet();
    const PolicyTable pi = PolicyTable::uniform(4, 4);
    const FeatureMatrix phi = FeatureMatrix::tabular(16);
    std::mt19937_64 rng = stream_rng(2, 0);
    const Trajectory traj = simulate_episode(spec, pi, rng);
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(16, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(h_of(theta, traj, spec, phi));
}
BENCHMARK(bm_h_of);

void bm_train_1000_episodes(benchmark::State& state) {
    const MdpSpec spec = gridlet();
    const FeatureMatrix phi = FeatureMatrix::tabular(16);
    const PolicyFamily family = PolicyFamily::softmax(0.05, 8.0);
    const StepSchedule schedule{1.0, 1000.0};
    for (auto _ : state) {
        TrainOptions options;
        options.episodes = 1000;
        options.seed = 5;
        options.report_cadence = 0;
        benchmark::DoNotOptimize(train(spec, phi, family, schedule, options).theta);
    }
}
BENCHMARK(bm_train_1000_episodes);

void bm_coupled_fixed_point(benchmark::State& state) {
    const MdpSpec spec = gridlet();
    const FeatureMatrix phi = FeatureMatrix::tabular(16);
    const PolicyFamily family = PolicyFamily::softmax(0.05, 8.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_coupled_fixed_point(family, spec, phi).residual);
}
BENCHMARK(bm_coupled_fixed_point);

} // namespace

BENCHMARK_MAIN();
