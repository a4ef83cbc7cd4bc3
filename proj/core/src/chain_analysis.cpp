#include "episarsa/chain_analysis.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/norms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace episarsa {

ChainAnalysis::ChainAnalysis(const MdpSpec& spec, const PolicyTable& pi) {
    const int n = spec.num_pairs();
    const int num_actions = spec.num_actions();

    p_pi_ = Eigen::MatrixXd::Zero(n, n);
    lambda_pi_ = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < spec.num_transient(); ++s) {
        for (int a = 0; a < num_actions; ++a) {
            const int row = spec.pair_index(s, a);
            lambda_pi_[row] = pi.prob(s, a) * spec.initial_dist()[s];
            const auto& p_row = spec.transition_row(s, a);
            for (int sn = 0; sn < spec.num_transient(); ++sn) {
                if (p_row[sn] == 0.0) continue;
                for (int an = 0; an < num_actions; ++an)
                    p_pi_(row, spec.pair_index(sn, an)) = p_row[sn] * pi.prob(sn, an);
            }
        }
    }

    radius_estimate_ = nonnegative_spectral_radius(p_pi_);
    if (radius_estimate_ >= kPropernessThreshold)
        throw AssumptionError("not proper: spectral radius estimate of P_pi is " +
                              std::to_string(radius_estimate_));

    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - p_pi_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    fundamental_ = lu.solve(Eigen::MatrixXd::Identity(n, n));
    eta_pi_ = fundamental_.transpose() * lambda_pi_;
    t_vec_ = fundamental_ * Eigen::VectorXd::Ones(n);
    var_vec_ = (2.0 * fundamental_ - Eigen::MatrixXd::Identity(n, n)) * t_vec_ -
               t_vec_.cwiseProduct(t_vec_);

    const double n_scale = std::max(1.0, fundamental_.cwiseAbs().maxCoeff());
    if (((m * fundamental_) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() >
        kSolveResidualTol * n_scale)
        throw NumericError("fundamental matrix solve exceeded residual tolerance");
    const double eta_scale = std::max(1.0, eta_pi_.lpNorm<Eigen::Infinity>());
    if ((eta_pi_ - (lambda_pi_ + p_pi_.transpose() * eta_pi_)).lpNorm<Eigen::Infinity>() >
        kSolveResidualTol * eta_scale)
        throw NumericError("eta recursion residual exceeded tolerance");
}

double absorption_second_moment(const ChainAnalysis& ca) {
    const int n = ca.num_pairs();
    const Eigen::VectorXd two_n_minus_i_t =
        (2.0 * ca.fundamental() - Eigen::MatrixXd::Identity(n, n)) * ca.t_vec();
    return ca.lambda_pi().dot(two_n_minus_i_t);
}

double contraction_coefficient(const ChainAnalysis& ca, ContractionCase which) {
    if (which == ContractionCase::case_i) {
        double beta = 0.0;
        for (int i = 0; i < ca.num_pairs(); ++i) {
            if (ca.lambda_pi()[i] <= 0.0)
                throw AssumptionError(
                    "contraction case i not satisfied: lambda_pi has a zero entry (case ii may "
                    "apply; otherwise discount_transform restores it)");
            beta = std::max(beta, 1.0 - ca.lambda_pi()[i] / ca.eta_pi()[i]);
        }
        return beta;
    }
    const Eigen::VectorXd row_sums = ca.p_pi().rowwise().sum();
    const double beta = ca.num_pairs() == 0 ? 0.0 : row_sums.maxCoeff();
    if (beta >= 1.0 - 1e-12)
        throw AssumptionError(
            "contraction case ii not satisfied: a row of P_pi keeps unit transient mass (case i "
            "may apply; otherwise discount_transform restores it)");
    return beta;
}

double weighted_norm(const Eigen::VectorXd& q, const ChainAnalysis& ca) {
    if (q.size() != ca.eta_pi().size())
        throw std::invalid_argument("weighted_norm: dimension mismatch");
    return std::sqrt(q.dot(ca.eta_pi().cwiseProduct(q)));
}

} // namespace episarsa
