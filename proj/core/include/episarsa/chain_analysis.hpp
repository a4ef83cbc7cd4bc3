#pragma once

#include "episarsa/mdp.hpp"

#include <Eigen/Dense>

namespace episarsa {

/// Absorbing-chain quantities of the state-action chain induced by a policy.
///
/// The chain lives on transient pairs (s,a) only (terminal rows are zero and
/// carry no information). All fields are fixed at construction:
///
///   p_pi(s',a'|s,a) = p(s'|s,a) pi(a'|s')
///   lambda_pi(s,a)  = pi(a|s) lambda(s)
///   fundamental N   = (I - P_pi)^-1
///   eta_pi^T        = lambda_pi^T N        (expected visit counts)
///   t_vec           = N 1                  (expected steps to absorption)
///   var_vec         = (2N - I) t - t.*t    (variance of steps to absorption)
class ChainAnalysis {
public:
    static constexpr double kPropernessThreshold = 1.0 - 1e-9;
    static constexpr double kSolveResidualTol = 1e-12;

    /// Throws AssumptionError("not proper...") when the spectral-radius
    /// estimate of P_pi reaches the threshold, NumericError when a linear
    /// solve fails its residual check.
    ChainAnalysis(const MdpSpec& spec, const PolicyTable& pi);

    const Eigen::MatrixXd& p_pi() const { return p_pi_; }
    const Eigen::VectorXd& lambda_pi() const { return lambda_pi_; }
    const Eigen::MatrixXd& fundamental() const { return fundamental_; }
    const Eigen::VectorXd& eta_pi() const { return eta_pi_; }
    Eigen::MatrixXd d_pi() const { return eta_pi_.asDiagonal(); }
    const Eigen::VectorXd& t_vec() const { return t_vec_; }
    const Eigen::VectorXd& var_vec() const { return var_vec_; }
    double spectral_radius_estimate() const { return radius_estimate_; }
    int num_pairs() const { return static_cast<int>(eta_pi_.size()); }

private:
    Eigen::MatrixXd p_pi_;
    Eigen::VectorXd lambda_pi_;
    Eigen::MatrixXd fundamental_;
    Eigen::VectorXd eta_pi_;
    Eigen::VectorXd t_vec_;
    Eigen::VectorXd var_vec_;
    double radius_estimate_ = 0.0;
};

inline ChainAnalysis analyze(const MdpSpec& spec, const PolicyTable& pi) {
    return ChainAnalysis(spec, pi);
}

/// E[Gamma^2] = lambda_pi^T (2N - I) t, the second moment of the absorption time.
double absorption_second_moment(const ChainAnalysis& ca);

enum class ContractionCase { case_i, case_ii };

/// Contraction coefficient of P_pi in the eta-weighted norm:
///   case_i : beta = 1 - min lambda_pi/eta_pi   (needs lambda_pi > 0 everywhere)
///   case_ii: beta = max row sum of P_pi        (needs every row sum < 1)
/// Throws AssumptionError when the selected case's hypothesis fails.
double contraction_coefficient(const ChainAnalysis& ca, ContractionCase which);

/// sqrt(q^T D_pi q).
double weighted_norm(const Eigen::VectorXd& q, const ChainAnalysis& ca);

} // namespace episarsa
