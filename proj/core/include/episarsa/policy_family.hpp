#pragma once

#include "episarsa/linear_fa.hpp"
#include "episarsa/mdp.hpp"

#include <cstdint>
#include <optional>

namespace episarsa {

enum class FamilyKind {
    constant,         // ignores theta; Lipschitz constant 0
    eps_soft_softmax, // eps floor + softmax over phi(s,.)^T theta / tau
    eps_greedy_demo,  // discontinuous; gated behind the nonconvergent-demo flag
};

/// A theta-parameterized behaviour-policy family. Every evaluation lands in
/// the epsilon-soft polytope; the softmax family is Lipschitz in theta with
/// a constant controlled by the temperature.
class PolicyFamily {
public:
    static PolicyFamily constant(PolicyTable base, double epsilon);
    static PolicyFamily softmax(double epsilon, double temperature);
    /// epsilon-greedy over approximate action values; discontinuous in theta.
    /// Only constructible through this named function so call sites opt in.
    static PolicyFamily eps_greedy_demo(double epsilon);

    FamilyKind kind() const { return kind_; }
    double epsilon() const { return epsilon_; }
    double temperature() const { return temperature_; }

    /// pi_theta as a policy table. For the softmax family:
    ///   pi(a|s) = eps + (1 - |A| eps) * softmax_a(phi(s,a)^T theta / tau)
    /// computed with row-max subtraction. Throws AssumptionError when
    /// eps * |A| > 1.
    PolicyTable evaluate(const Eigen::VectorXd& theta, const FeatureMatrix& phi, int num_states,
                         int num_actions) const;

private:
    PolicyFamily(FamilyKind kind, double epsilon, double temperature,
                 std::optional<PolicyTable> base)
        : kind_(kind), epsilon_(epsilon), temperature_(temperature), base_(std::move(base)) {}

    FamilyKind kind_;
    double epsilon_;
    double temperature_;
    std::optional<PolicyTable> base_;
};

/// Sampled lower bound on the Lipschitz constant of theta -> pi_theta:
/// the largest secant slope ||pi_1 - pi_2|| / ||theta_1 - theta_2|| over
/// sampled pairs inside the ball of the given radius (half of them
/// short-range pairs so local slopes are represented).
double estimate_lipschitz(const PolicyFamily& family, const FeatureMatrix& phi, int num_states,
                          int num_actions, int sample_count, double radius, std::uint64_t seed);

/// Uniform draw from the epsilon-soft polytope: each row is
/// eps + (1 - |A| eps) * Dirichlet(1,...,1).
PolicyTable sample_delta_eps(const MdpSpec& spec, double epsilon, std::uint64_t seed);

} // namespace episarsa
