#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace episarsa {

/// A finite random-horizon (absorbing) MDP.
///
/// States are split into transient and terminal sets; global state indices
/// run over transient states first, then terminal states. Transition and
/// reward tables are dense over (transient state, action) rows and all-state
/// columns. An instance is immutable once constructed; semantic problems are
/// reported by validate(), not thrown.
class MdpSpec {
public:
    struct TransitionEntry {
        std::string s, a, s_next;
        double p = 0.0;
    };
    struct RewardEntry {
        std::string s, a, s_next;
        double r = 0.0;
    };
    struct InitialEntry {
        std::string s;
        double p = 0.0;
    };

    /// Builds the dense tables. If implicit_sink names a terminal state, any
    /// transition-row deficit (1 - row sum) is routed there with reward 0.
    /// Identifier problems are recorded for validate() rather than thrown.
    MdpSpec(std::vector<std::string> transient_states,
            std::vector<std::string> terminal_states,
            std::vector<std::string> actions,
            const std::vector<TransitionEntry>& transitions,
            const std::vector<RewardEntry>& rewards,
            const std::vector<InitialEntry>& initial,
            std::optional<std::string> implicit_sink = std::nullopt);

    int num_transient() const { return static_cast<int>(transient_states_.size()); }
    int num_terminal() const { return static_cast<int>(terminal_states_.size()); }
    int num_states() const { return num_transient() + num_terminal(); }
    int num_actions() const { return static_cast<int>(actions_.size()); }
    int num_pairs() const { return num_transient() * num_actions(); }

    /// Row index of (s, a) in all state-action-pair vectors: s-major.
    int pair_index(int s, int a) const { return s * num_actions() + a; }

    const std::vector<std::string>& transient_states() const { return transient_states_; }
    const std::vector<std::string>& terminal_states() const { return terminal_states_; }
    const std::vector<std::string>& actions() const { return actions_; }
    const std::optional<std::string>& implicit_sink() const { return implicit_sink_; }

    /// Identifier of a global state index (transient first, then terminal).
    const std::string& state_id(int global_index) const;
    bool is_terminal_index(int global_index) const { return global_index >= num_transient(); }

    /// p(.|s,a) over all global states, length num_states().
    const Eigen::VectorXd& transition_row(int s, int a) const { return trans_[pair_index(s, a)]; }
    /// r(s,a,.) over all global states, length num_states().
    const Eigen::VectorXd& reward_row(int s, int a) const { return rew_[pair_index(s, a)]; }
    double transition_prob(int s, int a, int s_next_global) const { return transition_row(s, a)[s_next_global]; }
    double reward(int s, int a, int s_next_global) const { return reward_row(s, a)[s_next_global]; }

    /// Initial distribution over transient states.
    const Eigen::VectorXd& initial_dist() const { return lambda_; }

    /// max |r(s,a,s')| over transitions with positive probability.
    double r_max() const { return r_max_; }

    bool has_structural_violations() const { return !structural_violations_.empty(); }
    const std::vector<std::string>& structural_violations() const { return structural_violations_; }

private:
    std::vector<std::string> transient_states_;
    std::vector<std::string> terminal_states_;
    std::vector<std::string> actions_;
    std::optional<std::string> implicit_sink_;
    std::vector<Eigen::VectorXd> trans_; // per pair, over global states
    std::vector<Eigen::VectorXd> rew_;
    Eigen::VectorXd lambda_;
    double r_max_ = 0.0;
    std::vector<std::string> structural_violations_;
};

/// A point of the epsilon-soft polytope: row-stochastic |S| x |A| table with
/// every entry at or above the floor. Construction enforces the invariants.
class PolicyTable {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    PolicyTable(Eigen::MatrixXd probs, double epsilon_floor = 0.0);

    static PolicyTable uniform(int num_states, int num_actions);

    double prob(int s, int a) const { return probs_(s, a); }
    const Eigen::MatrixXd& matrix() const { return probs_; }
    double epsilon_floor() const { return epsilon_floor_; }
    int num_states() const { return static_cast<int>(probs_.rows()); }
    int num_actions() const { return static_cast<int>(probs_.cols()); }

    /// s-major flattening, matching MdpSpec::pair_index.
    Eigen::VectorXd vectorized() const;

private:
    Eigen::MatrixXd probs_;
    double epsilon_floor_;
};

struct ExpectedReward {
    Eigen::VectorXd r_bar; // length |S||A|, pair_index order
};

struct Violation {
    std::string location;
    std::string message;
};
using ValidationReport = std::vector<Violation>;

/// Checks every MdpSpec invariant plus reachability of all transient states
/// from supp(lambda) under the uniform policy. Empty report means valid.
ValidationReport validate(const MdpSpec& spec);

/// r_bar(s,a) = sum_{s'} p(s'|s,a) r(s,a,s').
ExpectedReward expected_reward(const MdpSpec& spec);

/// Discount-as-termination transform: appends a terminal gamma-sink, scales
/// all transition probabilities by gamma and routes the residual mass to the
/// sink with reward 0. Surviving rewards are scaled by 1/gamma so that the
/// expected per-pair reward r(s,a) -- and hence the exact q -- matches the
/// gamma-discounted q of the original problem.
MdpSpec discount_transform(const MdpSpec& spec, double gamma);

} // namespace episarsa
