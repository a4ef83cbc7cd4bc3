#include "episarsa/trainer.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/exact_sum.hpp"
#include "episarsa/rng.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace episarsa {

double Trajectory::total_reward() const {
    double sum = 0.0;
    for (double r : rewards) sum += r;
    return sum;
}

namespace {

int sample_policy_row(const Eigen::MatrixXd& probs, int s, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double cum = 0.0;
    int last_positive = -1;
    for (Eigen::Index a = 0; a < probs.cols(); ++a) {
        const double p = probs(s, a);
        if (p <= 0.0) continue;
        last_positive = static_cast<int>(a);
        cum += p;
        if (u < cum) return static_cast<int>(a);
    }
    return last_positive;
}

} // namespace

Trajectory simulate_episode(const MdpSpec& spec, const PolicyTable& pi, std::mt19937_64& rng) {
    Trajectory traj;
    const Eigen::VectorXd& lambda = spec.initial_dist();
    int s = sample_categorical(std::span<const double>(lambda.data(),
                                                       static_cast<std::size_t>(lambda.size())),
                               rng);
    traj.states.push_back(s);
    for (long step = 0; step < kEpisodeCap; ++step) {
        const int a = sample_policy_row(pi.matrix(), s, rng);
        const Eigen::VectorXd& p_row = spec.transition_row(s, a);
        const int s_next = sample_categorical(
            std::span<const double>(p_row.data(), static_cast<std::size_t>(p_row.size())), rng);
        traj.actions.push_back(a);
        traj.rewards.push_back(spec.reward(s, a, s_next));
        traj.states.push_back(s_next);
        if (spec.is_terminal_index(s_next)) return traj;
        s = s_next;
    }
    throw AssumptionError("episode cap exceeded: the behaviour policy does not appear proper");
}

namespace {

void add_td_term(ExactVectorSum& acc, const FeatureMatrix& phi, int pair, double delta,
                 double count) {
    const auto& m = phi.matrix();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double coeff = m(pair, j);
        if (coeff == 0.0) continue;
        if (count == 1.0)
            acc.add_product(j, coeff, delta);
        else
            acc.add_product(j, count, coeff, delta);
    }
}

} // namespace

Eigen::VectorXd h_of(const Eigen::VectorXd& theta, const Trajectory& traj, const MdpSpec& spec,
                     const FeatureMatrix& phi) {
    if (theta.size() != phi.dim()) throw std::invalid_argument("h_of: theta dimension mismatch");
    if (phi.num_pairs() != spec.num_pairs())
        throw std::invalid_argument("h_of: feature/spec dimension mismatch");
    const int num_actions = spec.num_actions();
    ExactVectorSum acc(phi.dim());
    const int t_len = traj.length();
    for (int u = 0; u < t_len; ++u) {
        const int pair = traj.states[u] * num_actions + traj.actions[u];
        const double q_next = (u + 1 < t_len)
                                  ? phi.q_hat(traj.states[u + 1] * num_actions + traj.actions[u + 1],
                                              theta)
                                  : 0.0; // phi(terminal,.) = 0
        const double delta = traj.rewards[u] + q_next - phi.q_hat(pair, theta);
        add_td_term(acc, phi, pair, delta, 1.0);
    }
    return acc.rounded();
}

Eigen::VectorXd h_of_transition_counts(const Eigen::VectorXd& theta, const Trajectory& traj,
                                       const MdpSpec& spec, const FeatureMatrix& phi) {
    if (theta.size() != phi.dim()) throw std::invalid_argument("h_of: theta dimension mismatch");
    if (phi.num_pairs() != spec.num_pairs())
        throw std::invalid_argument("h_of: feature/spec dimension mismatch");
    const int num_actions = spec.num_actions();

    // key: (pair, s'_global, a' or -1 when s' is terminal) -> multiplicity
    std::map<std::tuple<int, int, int>, long> counts;
    const int t_len = traj.length();
    for (int u = 0; u < t_len; ++u) {
        const int pair = traj.states[u] * num_actions + traj.actions[u];
        const int s_next = traj.states[u + 1];
        const int a_next = (u + 1 < t_len) ? traj.actions[u + 1] : -1;
        ++counts[{pair, s_next, a_next}];
    }

    ExactVectorSum acc(phi.dim());
    for (const auto& [key, count] : counts) {
        const auto& [pair, s_next, a_next] = key;
        const int s = pair / num_actions;
        const int a = pair % num_actions;
        const double q_next =
            (a_next >= 0) ? phi.q_hat(s_next * num_actions + a_next, theta) : 0.0;
        const double delta = spec.reward(s, a, s_next) + q_next - phi.q_hat(pair, theta);
        add_td_term(acc, phi, pair, delta, static_cast<double>(count));
    }
    return acc.rounded();
}

namespace {

std::string dump_ring(const std::deque<HistoryRow>& ring) {
    std::ostringstream out;
    out << "last updates (episode, |theta|, T, return, alpha):";
    for (const auto& row : ring)
        out << "\n  " << row.episode << ", " << row.theta.norm() << ", " << row.episode_length
            << ", " << row.episode_return << ", " << row.alpha;
    return out.str();
}

} // namespace

TrainResult train(const MdpSpec& spec, const FeatureMatrix& phi, const PolicyFamily& family,
                  const StepSchedule& schedule, const TrainOptions& options) {
    if (options.episodes < 1) throw std::invalid_argument("train: episodes must be >= 1");
    TrainResult result;
    Eigen::VectorXd theta =
        options.theta0.size() == phi.dim() ? options.theta0 : Eigen::VectorXd::Zero(phi.dim());

    std::deque<HistoryRow> ring;
    auto record = [&](long completed, long t_len, double ret, double alpha) {
        HistoryRow row;
        row.episode = completed;
        row.theta = theta;
        if (options.theta_ref) row.dist_to_ref = (theta - *options.theta_ref).norm();
        row.episode_length = t_len;
        row.episode_return = ret;
        row.alpha = alpha;
        return row;
    };

    for (long t = options.first_episode; t < options.episodes; ++t) {
        const PolicyTable pi =
            family.evaluate(theta, phi, spec.num_transient(), spec.num_actions());
        std::mt19937_64 rng = stream_rng(options.seed, static_cast<std::uint64_t>(t));
        const Trajectory traj = simulate_episode(spec, pi, rng);
        const double alpha = schedule.alpha(t + 1);
        theta += alpha * h_of(theta, traj, spec, phi);

        const HistoryRow row = record(t + 1, traj.length(), traj.total_reward(), alpha);
        ring.push_back(row);
        if (ring.size() > 100) ring.pop_front();
        if (!theta.allFinite())
            throw NumericError("train: theta became non-finite at episode " + std::to_string(t + 1) +
                               "\n" + dump_ring(ring));
        if (options.report_cadence > 0 &&
            ((t + 1) % options.report_cadence == 0 || t + 1 == options.episodes))
            result.history.push_back(row);
    }

    result.theta = std::move(theta);
    result.episodes_run = options.episodes - options.first_episode;
    return result;
}

} // namespace episarsa
