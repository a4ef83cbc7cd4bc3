#pragma once

#include "episarsa/linear_fa.hpp"
#include "episarsa/mdp.hpp"
#include "episarsa/policy_family.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace episarsa {

/// One sampled episode: states S_0..S_T (only the last is terminal, as a
/// global index), actions A_0..A_{T-1} and rewards r_0..r_{T-1}.
struct Trajectory {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;

    int length() const { return static_cast<int>(actions.size()); }
    double total_reward() const;
};

/// Harmonic step sizes alpha_t = alpha0 / (1 + t/t0). Divergent sum,
/// convergent sum of squares.
struct StepSchedule {
    double alpha0 = 1.0;
    double t0 = 1000.0;

    double alpha(long t) const { return alpha0 / (1.0 + static_cast<double>(t) / t0); }
};

inline constexpr long kEpisodeCap = 1000000;

/// S_0 ~ lambda, A_u ~ pi(.|S_u), S_{u+1} ~ p(.|S_u,A_u), stops at the first
/// terminal state. Throws AssumptionError after kEpisodeCap steps (a proper
/// policy terminates long before).
Trajectory simulate_episode(const MdpSpec& spec, const PolicyTable& pi, std::mt19937_64& rng);

/// Trajectory-batched TD increment
///   H(theta, X) = sum_u phi_u (r_u + phi_{u+1}^T theta - phi_u^T theta)
/// with phi(terminal,.) = 0. Accumulated error-free, so the value is bit
/// identical to the transition-count rewrite below.
Eigen::VectorXd h_of(const Eigen::VectorXd& theta, const Trajectory& traj, const MdpSpec& spec,
                     const FeatureMatrix& phi);

/// Same quantity grouped by distinct transitions (s,a)->(s',a') with integer
/// multiplicities, evaluated in canonical pair order.
Eigen::VectorXd h_of_transition_counts(const Eigen::VectorXd& theta, const Trajectory& traj,
                                       const MdpSpec& spec, const FeatureMatrix& phi);

struct HistoryRow {
    long episode = 0; // episodes completed when the row was written
    Eigen::VectorXd theta;
    double dist_to_ref = std::numeric_limits<double>::quiet_NaN();
    long episode_length = 0;
    double episode_return = 0.0;
    double alpha = 0.0;
};

struct TrainOptions {
    long episodes = 0;
    std::uint64_t seed = 0;
    long report_cadence = 1000;            // history row every this many episodes
    std::optional<Eigen::VectorXd> theta_ref; // distance column reference (theta_star)
    Eigen::VectorXd theta0;                // empty = zeros
    long first_episode = 0;                // resume point; streams are per-episode
};

struct TrainResult {
    Eigen::VectorXd theta;
    long episodes_run = 0;
    std::vector<HistoryRow> history;
};

/// Trajectory-batched training: refresh pi from theta at each episode
/// boundary, sample one trajectory, apply theta += alpha_{t+1} H(theta, X).
/// The per-episode RNG stream is derived from (seed, episode index), so a
/// run restarted from (theta_t, t, seed) reproduces the remainder bit-exactly.
/// Throws NumericError with a dump of the last 100 updates if theta leaves
/// the finite range.
TrainResult train(const MdpSpec& spec, const FeatureMatrix& phi, const PolicyFamily& family,
                  const StepSchedule& schedule, const TrainOptions& options);

} // namespace episarsa
