#pragma once

#include "episarsa/chain_analysis.hpp"
#include "episarsa/mdp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace episarsa {

class PolicyFamily;

/// Basis matrix Phi (one row per state-action pair). Construction enforces
/// column independence (smallest singular value > 1e-10) and caches the
/// infinity norm Phi_max.
class FeatureMatrix {
public:
    static constexpr double kMinSingularValue = 1e-10;

    explicit FeatureMatrix(Eigen::MatrixXd phi);

    static FeatureMatrix tabular(int num_pairs);

    const Eigen::MatrixXd& matrix() const { return phi_; }
    int num_pairs() const { return static_cast<int>(phi_.rows()); }
    int dim() const { return static_cast<int>(phi_.cols()); }
    double phi_max() const { return phi_max_; }

    /// phi(s,a)^T theta for pair row i.
    double q_hat(int pair, const Eigen::VectorXd& theta) const {
        return phi_.row(pair).dot(theta);
    }

private:
    Eigen::MatrixXd phi_;
    double phi_max_;
};

/// The linear TD system of a fixed policy:
///   a_pi = Phi^T D_pi (P_pi - I) Phi,  b_pi = Phi^T D_pi r_bar,
///   theta_pi = -a_pi^{-1} b_pi.
struct TdSystem {
    Eigen::MatrixXd a_pi;
    Eigen::VectorXd b_pi;
    Eigen::VectorXd theta_pi;
};

/// Builds the TD system; throws AssumptionError if the symmetrised a_pi is
/// not negative definite and NumericError if the theta solve fails its
/// 1e-10 residual check.
TdSystem assemble(const MdpSpec& spec, const FeatureMatrix& phi, const ChainAnalysis& ca);

/// a_pi and b_pi only (no definiteness check, no solve); shared by routines
/// that evaluate many policies.
void td_matrices(const MdpSpec& spec, const FeatureMatrix& phi, const ChainAnalysis& ca,
                 Eigen::MatrixXd& a_pi, Eigen::VectorXd& b_pi);

/// Exact action values q = N r_bar (checked against q = r_bar + P_pi q).
Eigen::VectorXd exact_q(const MdpSpec& spec, const ChainAnalysis& ca);

/// T_pi q = r_bar + P_pi q.
Eigen::VectorXd bellman_op(const Eigen::VectorXd& q, const MdpSpec& spec, const ChainAnalysis& ca);

/// Projection onto span(Phi) in the eta_pi-weighted norm.
/// Throws AssumptionError when the Gram matrix Phi^T D_pi Phi is singular.
Eigen::VectorXd project(const Eigen::VectorXd& q, const FeatureMatrix& phi, const ChainAnalysis& ca);

/// s_pi(theta) = Phi^T D_pi (T_pi Phi theta - Phi theta). Equals a_pi theta + b_pi.
Eigen::VectorXd s_vec(const Eigen::VectorXd& theta, const MdpSpec& spec, const FeatureMatrix& phi,
                      const ChainAnalysis& ca);

/// F^alpha(theta) = theta + alpha * s_pi(theta), alpha > 0.
Eigen::VectorXd f_alpha(const Eigen::VectorXd& theta, double alpha, const MdpSpec& spec,
                        const FeatureMatrix& phi, const ChainAnalysis& ca);

struct CoupledFixedPointConfig {
    double residual_tol = 1e-9;
    long max_iterations = 1000000;
    int constant_estimation_samples = 16; // policies sampled to seed the step size
    double constant_estimation_radius = 5.0;
    std::uint64_t seed = 20240901;
    Eigen::VectorXd theta0; // empty = zeros
};

struct CoupledFixedPointResult {
    Eigen::VectorXd theta;
    double residual = 0.0;
    long iterations = 0;
    bool converged = false;
    double alpha_final = 0.0;
    std::vector<double> residual_history; // subsampled trace, last entry = final residual
};

/// Solves A_{pi_theta} theta + b_{pi_theta} = 0 by damped fixed-point
/// iteration theta <- F^alpha_{pi_theta}(theta). The initial alpha is
/// 2*C1/C2 with C1, C2 estimated from sampled policies (the quasi-contraction
/// constants); alpha halves whenever the residual would increase.
CoupledFixedPointResult solve_coupled_fixed_point(const PolicyFamily& family, const MdpSpec& spec,
                                                  const FeatureMatrix& phi,
                                                  const CoupledFixedPointConfig& config = {});

/// Max pairwise distance between coupled fixed points found from random
/// restarts. Uniqueness is not guaranteed; the spread is reported, never
/// treated as an error.
double multi_start_spread(const PolicyFamily& family, const MdpSpec& spec,
                          const FeatureMatrix& phi, int starts, double radius,
                          std::uint64_t seed, const CoupledFixedPointConfig& config = {});

} // namespace episarsa
