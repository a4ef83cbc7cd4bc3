#include "episarsa/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace episarsa {

namespace {

constexpr double kProbTol = 1e-12;

void check_ids(const std::vector<std::string>& ids, const char* what,
               std::vector<std::string>& out) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (id.empty()) out.push_back(std::string(what) + ": empty identifier");
        if (!seen.insert(id).second) out.push_back(std::string(what) + ": duplicate identifier '" + id + "'");
    }
}

} // namespace

MdpSpec::MdpSpec(std::vector<std::string> transient_states,
                 std::vector<std::string> terminal_states,
                 std::vector<std::string> actions,
                 const std::vector<TransitionEntry>& transitions,
                 const std::vector<RewardEntry>& rewards,
                 const std::vector<InitialEntry>& initial,
                 std::optional<std::string> implicit_sink)
    : transient_states_(std::move(transient_states)),
      terminal_states_(std::move(terminal_states)),
      actions_(std::move(actions)),
      implicit_sink_(std::move(implicit_sink)) {
    check_ids(transient_states_, "states", structural_violations_);
    check_ids(terminal_states_, "terminals", structural_violations_);
    check_ids(actions_, "actions", structural_violations_);

    std::unordered_map<std::string, int> state_index;   // global
    std::unordered_map<std::string, int> action_index;
    for (int i = 0; i < num_transient(); ++i) state_index.emplace(transient_states_[i], i);
    for (int i = 0; i < num_terminal(); ++i) {
        auto [_, inserted] = state_index.emplace(terminal_states_[i], num_transient() + i);
        if (!inserted)
            structural_violations_.push_back("terminals: '" + terminal_states_[i] +
                                             "' also appears among transient states");
    }
    for (int i = 0; i < num_actions(); ++i) action_index.emplace(actions_[i], i);

    auto transient_of = [&](const std::string& id, const std::string& where) -> int {
        auto it = state_index.find(id);
        if (it == state_index.end() || it->second >= num_transient()) {
            structural_violations_.push_back(where + ": unknown transient state '" + id + "'");
            return -1;
        }
        return it->second;
    };
    auto global_of = [&](const std::string& id, const std::string& where) -> int {
        auto it = state_index.find(id);
        if (it == state_index.end()) {
            structural_violations_.push_back(where + ": unknown state '" + id + "'");
            return -1;
        }
        return it->second;
    };
    auto action_of = [&](const std::string& id, const std::string& where) -> int {
        auto it = action_index.find(id);
        if (it == action_index.end()) {
            structural_violations_.push_back(where + ": unknown action '" + id + "'");
            return -1;
        }
        return it->second;
    };

    int sink_global = -1;
    if (implicit_sink_) {
        auto it = state_index.find(*implicit_sink_);
        if (it == state_index.end() || it->second < num_transient())
            structural_violations_.push_back("implicit_sink: '" + *implicit_sink_ +
                                             "' is not a terminal state");
        else
            sink_global = it->second;
    }

    trans_.assign(static_cast<std::size_t>(std::max(num_pairs(), 0)),
                  Eigen::VectorXd::Zero(num_states()));
    rew_.assign(static_cast<std::size_t>(std::max(num_pairs(), 0)),
                Eigen::VectorXd::Zero(num_states()));
    lambda_ = Eigen::VectorXd::Zero(num_transient());

    for (const auto& e : transitions) {
        const std::string where = "transition (" + e.s + "," + e.a + "," + e.s_next + ")";
        const int s = transient_of(e.s, where);
        const int a = action_of(e.a, where);
        const int sn = global_of(e.s_next, where);
        if (s < 0 || a < 0 || sn < 0) continue;
        trans_[static_cast<std::size_t>(pair_index(s, a))][sn] += e.p;
    }
    for (const auto& e : rewards) {
        const std::string where = "reward (" + e.s + "," + e.a + "," + e.s_next + ")";
        const int s = transient_of(e.s, where);
        const int a = action_of(e.a, where);
        const int sn = global_of(e.s_next, where);
        if (s < 0 || a < 0 || sn < 0) continue;
        rew_[static_cast<std::size_t>(pair_index(s, a))][sn] = e.r;
    }
    for (const auto& e : initial) {
        const std::string where = "initial (" + e.s + ")";
        const int s = transient_of(e.s, where);
        if (s < 0) continue;
        lambda_[s] += e.p;
    }

    if (sink_global >= 0) {
        for (auto& row : trans_) {
            const double deficit = 1.0 - row.sum();
            if (deficit > kProbTol) row[sink_global] += deficit;
        }
    }

    r_max_ = 0.0;
    for (int s = 0; s < num_transient(); ++s)
        for (int a = 0; a < num_actions(); ++a) {
            const auto& p = transition_row(s, a);
            const auto& r = reward_row(s, a);
            for (int sn = 0; sn < num_states(); ++sn)
                if (p[sn] > 0.0) r_max_ = std::max(r_max_, std::abs(r[sn]));
        }
}

const std::string& MdpSpec::state_id(int global_index) const {
    if (global_index < num_transient()) return transient_states_[static_cast<std::size_t>(global_index)];
    return terminal_states_[static_cast<std::size_t>(global_index - num_transient())];
}

PolicyTable::PolicyTable(Eigen::MatrixXd probs, double epsilon_floor)
    : probs_(std::move(probs)), epsilon_floor_(epsilon_floor) {
    if (epsilon_floor_ < 0.0) throw std::invalid_argument("policy: negative epsilon floor");
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
        const double row_sum = probs_.row(s).sum();
        if (std::abs(row_sum - 1.0) > kRowSumTolerance)
            throw std::invalid_argument("policy: row " + std::to_string(s) + " sums to " +
                                        std::to_string(row_sum));
        for (Eigen::Index a = 0; a < probs_.cols(); ++a)
            if (probs_(s, a) < epsilon_floor_)
                throw std::invalid_argument("policy: entry (" + std::to_string(s) + "," +
                                            std::to_string(a) + ") below epsilon floor");
    }
}

PolicyTable PolicyTable::uniform(int num_states, int num_actions) {
    return PolicyTable(Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions),
                       1.0 / num_actions);
}

Eigen::VectorXd PolicyTable::vectorized() const {
    Eigen::VectorXd v(probs_.rows() * probs_.cols());
    for (Eigen::Index s = 0; s < probs_.rows(); ++s)
        for (Eigen::Index a = 0; a < probs_.cols(); ++a) v[s * probs_.cols() + a] = probs_(s, a);
    return v;
}

ValidationReport validate(const MdpSpec& spec) {
    ValidationReport report;
    for (const auto& v : spec.structural_violations()) report.push_back({"structure", v});
    if (spec.num_terminal() == 0)
        report.push_back({"terminals", "at least one terminal state is required"});
    if (spec.num_transient() == 0)
        report.push_back({"states", "at least one transient state is required"});
    if (spec.num_actions() == 0) report.push_back({"actions", "at least one action is required"});
    if (!report.empty() && spec.has_structural_violations()) return report;

    for (int s = 0; s < spec.num_transient(); ++s) {
        for (int a = 0; a < spec.num_actions(); ++a) {
            const std::string loc = "(" + spec.transient_states()[s] + "," + spec.actions()[a] + ")";
            const auto& row = spec.transition_row(s, a);
            double sum = 0.0;
            for (int sn = 0; sn < spec.num_states(); ++sn) {
                if (row[sn] < 0.0)
                    report.push_back({loc, "negative probability to '" + spec.state_id(sn) + "'"});
                if (!std::isfinite(row[sn]))
                    report.push_back({loc, "non-finite probability to '" + spec.state_id(sn) + "'"});
                if (!std::isfinite(spec.reward(s, a, sn)))
                    report.push_back({loc, "non-finite reward to '" + spec.state_id(sn) + "'"});
                sum += row[sn];
            }
            if (sum > 1.0 + kProbTol)
                report.push_back({loc, "row sum > 1 (" + std::to_string(sum) + ")"});
            if (sum < 1.0 - kProbTol)
                report.push_back({loc, "row sum < 1 (" + std::to_string(sum) +
                                           "); set implicit_sink to model termination mass"});
        }
    }

    const auto& lambda = spec.initial_dist();
    double lsum = 0.0;
    for (int s = 0; s < spec.num_transient(); ++s) {
        if (lambda[s] < 0.0)
            report.push_back({"initial(" + spec.transient_states()[s] + ")", "negative probability"});
        lsum += lambda[s];
    }
    if (std::abs(lsum - 1.0) > kProbTol)
        report.push_back({"initial", "distribution sums to " + std::to_string(lsum)});

    // Assumption 4 surrogate: reachability from supp(lambda) in the support
    // graph, which is shared by every epsilon-soft policy.
    std::vector<bool> reached(static_cast<std::size_t>(spec.num_transient()), false);
    std::deque<int> queue;
    for (int s = 0; s < spec.num_transient(); ++s)
        if (lambda[s] > 0.0) {
            reached[static_cast<std::size_t>(s)] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        for (int a = 0; a < spec.num_actions(); ++a) {
            const auto& row = spec.transition_row(s, a);
            for (int sn = 0; sn < spec.num_transient(); ++sn)
                if (row[sn] > 0.0 && !reached[static_cast<std::size_t>(sn)]) {
                    reached[static_cast<std::size_t>(sn)] = true;
                    queue.push_back(sn);
                }
        }
    }
    for (int s = 0; s < spec.num_transient(); ++s)
        if (!reached[static_cast<std::size_t>(s)])
            report.push_back({"state " + spec.transient_states()[s],
                              "not reachable from the initial distribution"});

    return report;
}

ExpectedReward expected_reward(const MdpSpec& spec) {
    ExpectedReward out;
    out.r_bar = Eigen::VectorXd::Zero(spec.num_pairs());
    for (int s = 0; s < spec.num_transient(); ++s)
        for (int a = 0; a < spec.num_actions(); ++a)
            out.r_bar[spec.pair_index(s, a)] = spec.transition_row(s, a).dot(spec.reward_row(s, a));
    return out;
}

MdpSpec discount_transform(const MdpSpec& spec, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("discount_transform: gamma must lie in (0,1)");

    std::string sink = "gamma_sink";
    auto taken = [&](const std::string& id) {
        auto in = [&](const std::vector<std::string>& v) {
            return std::find(v.begin(), v.end(), id) != v.end();
        };
        return in(spec.transient_states()) || in(spec.terminal_states());
    };
    while (taken(sink)) sink += "_";

    std::vector<std::string> terminals = spec.terminal_states();
    terminals.push_back(sink);

    std::vector<MdpSpec::TransitionEntry> transitions;
    std::vector<MdpSpec::RewardEntry> rewards;
    std::vector<MdpSpec::InitialEntry> initial;
    for (int s = 0; s < spec.num_transient(); ++s) {
        for (int a = 0; a < spec.num_actions(); ++a) {
            const auto& row = spec.transition_row(s, a);
            double scaled_sum = 0.0;
            for (int sn = 0; sn < spec.num_states(); ++sn) {
                if (row[sn] <= 0.0) continue;
                const double p = gamma * row[sn];
                scaled_sum += p;
                transitions.push_back({spec.transient_states()[s], spec.actions()[a],
                                       spec.state_id(sn), p});
                const double r = spec.reward(s, a, sn);
                if (r != 0.0)
                    rewards.push_back({spec.transient_states()[s], spec.actions()[a],
                                       spec.state_id(sn), r / gamma});
            }
            transitions.push_back({spec.transient_states()[s], spec.actions()[a], sink,
                                   1.0 - scaled_sum});
        }
    }
    for (int s = 0; s < spec.num_transient(); ++s)
        if (spec.initial_dist()[s] != 0.0)
            initial.push_back({spec.transient_states()[s], spec.initial_dist()[s]});

    return MdpSpec(spec.transient_states(), std::move(terminals), spec.actions(),
                   transitions, rewards, initial);
}

} // namespace episarsa
