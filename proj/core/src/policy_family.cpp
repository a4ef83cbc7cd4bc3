#include "episarsa/policy_family.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace episarsa {

PolicyFamily PolicyFamily::constant(PolicyTable base, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("policy family: negative epsilon");
    return PolicyFamily(FamilyKind::constant, epsilon, 0.0, std::move(base));
}

PolicyFamily PolicyFamily::softmax(double epsilon, double temperature) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("policy family: epsilon must be positive");
    if (!(temperature > 0.0))
        throw std::invalid_argument("policy family: temperature must be positive");
    return PolicyFamily(FamilyKind::eps_soft_softmax, epsilon, temperature, std::nullopt);
}

PolicyFamily PolicyFamily::eps_greedy_demo(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("policy family: epsilon must lie in (0,1]");
    return PolicyFamily(FamilyKind::eps_greedy_demo, epsilon, 0.0, std::nullopt);
}

PolicyTable PolicyFamily::evaluate(const Eigen::VectorXd& theta, const FeatureMatrix& phi,
                                   int num_states, int num_actions) const {
    if (kind_ == FamilyKind::constant) return *base_;

    if (kind_ == FamilyKind::eps_greedy_demo) {
        Eigen::MatrixXd probs =
            Eigen::MatrixXd::Constant(num_states, num_actions, epsilon_ / num_actions);
        for (int s = 0; s < num_states; ++s) {
            int best = 0;
            double best_q = phi.q_hat(s * num_actions, theta);
            for (int a = 1; a < num_actions; ++a) {
                const double q = phi.q_hat(s * num_actions + a, theta);
                if (q > best_q) {
                    best_q = q;
                    best = a;
                }
            }
            probs(s, best) += 1.0 - epsilon_;
        }
        return PolicyTable(std::move(probs), epsilon_ / num_actions);
    }

    if (epsilon_ * num_actions > 1.0 + 1e-12)
        throw AssumptionError("policy family: epsilon * |A| exceeds 1");
    Eigen::MatrixXd probs(num_states, num_actions);
    const double free_mass = std::max(0.0, 1.0 - epsilon_ * num_actions);
    Eigen::VectorXd logits(num_actions);
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a)
            logits[a] = phi.q_hat(s * num_actions + a, theta) / temperature_;
        const double top = logits.maxCoeff();
        double z = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            logits[a] = std::exp(logits[a] - top);
            z += logits[a];
        }
        for (int a = 0; a < num_actions; ++a) probs(s, a) = epsilon_ + free_mass * (logits[a] / z);
    }
    return PolicyTable(std::move(probs), epsilon_);
}

double estimate_lipschitz(const PolicyFamily& family, const FeatureMatrix& phi, int num_states,
                          int num_actions, int sample_count, double radius, std::uint64_t seed) {
    if (sample_count < 2) throw std::invalid_argument("estimate_lipschitz: need at least 2 samples");
    const int d = phi.dim();
    std::mt19937_64 rng = stream_rng(seed, 0x11b5);

    auto draw_in_ball = [&]() {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = standard_normal(rng);
        const double n = v.norm();
        if (n == 0.0) return Eigen::VectorXd::Zero(d).eval();
        const double r = radius * std::pow(uniform01(rng), 1.0 / d);
        return (v * (r / n)).eval();
    };

    double best = 0.0;
    for (int k = 0; k < sample_count; ++k) {
        const Eigen::VectorXd theta1 = draw_in_ball();
        Eigen::VectorXd theta2;
        if (k % 2 == 0) {
            theta2 = draw_in_ball();
        } else {
            // short-range probe around theta1
            Eigen::VectorXd dir(d);
            for (int i = 0; i < d; ++i) dir[i] = standard_normal(rng);
            if (dir.norm() == 0.0) continue;
            theta2 = theta1 + (1e-4 * radius / dir.norm()) * dir;
        }
        const double dist = (theta1 - theta2).norm();
        if (dist == 0.0) continue;
        const PolicyTable p1 = family.evaluate(theta1, phi, num_states, num_actions);
        const PolicyTable p2 = family.evaluate(theta2, phi, num_states, num_actions);
        best = std::max(best, (p1.matrix() - p2.matrix()).norm() / dist);
    }
    return best;
}

PolicyTable sample_delta_eps(const MdpSpec& spec, double epsilon, std::uint64_t seed) {
    const int num_states = spec.num_transient();
    const int num_actions = spec.num_actions();
    if (epsilon * num_actions > 1.0 + 1e-12)
        throw AssumptionError("sample_delta_eps: epsilon * |A| exceeds 1");
    std::mt19937_64 rng = stream_rng(seed, 0xde17a);
    Eigen::MatrixXd probs(num_states, num_actions);
    const double free_mass = std::max(0.0, 1.0 - epsilon * num_actions);
    for (int s = 0; s < num_states; ++s) {
        double z = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            // Dirichlet(1,...,1) via normalised exponentials
            probs(s, a) = -std::log1p(-uniform01(rng));
            z += probs(s, a);
        }
        if (z == 0.0) {
            probs.row(s).setConstant(1.0 / num_actions);
            continue;
        }
        for (int a = 0; a < num_actions; ++a) probs(s, a) = epsilon + free_mass * (probs(s, a) / z);
    }
    return PolicyTable(std::move(probs), epsilon);
}

} // namespace episarsa
