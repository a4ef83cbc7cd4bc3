#include "episarsa/linear_fa.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/policy_family.hpp"
#include "episarsa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace episarsa {

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd phi) : phi_(std::move(phi)) {
    if (phi_.rows() == 0 || phi_.cols() == 0)
        throw std::invalid_argument("feature matrix must be non-empty");
    if (phi_.cols() > phi_.rows())
        throw std::invalid_argument("feature matrix has more columns than state-action pairs");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi_);
    if (svd.singularValues().minCoeff() <= kMinSingularValue)
        throw std::invalid_argument("feature matrix columns are not linearly independent");
    phi_max_ = phi_.cwiseAbs().rowwise().sum().maxCoeff();
}

FeatureMatrix FeatureMatrix::tabular(int num_pairs) {
    return FeatureMatrix(Eigen::MatrixXd::Identity(num_pairs, num_pairs));
}

void td_matrices(const MdpSpec& spec, const FeatureMatrix& phi, const ChainAnalysis& ca,
                 Eigen::MatrixXd& a_pi, Eigen::VectorXd& b_pi) {
    const Eigen::VectorXd r_bar = expected_reward(spec).r_bar;
    const Eigen::MatrixXd weighted = ca.eta_pi().asDiagonal() * phi.matrix();
    a_pi = phi.matrix().transpose() *
           (ca.eta_pi().asDiagonal() * (ca.p_pi() * phi.matrix() - phi.matrix()));
    b_pi = weighted.transpose() * r_bar;
}

TdSystem assemble(const MdpSpec& spec, const FeatureMatrix& phi, const ChainAnalysis& ca) {
    TdSystem sys;
    td_matrices(spec, phi, ca, sys.a_pi, sys.b_pi);

    const Eigen::MatrixXd sym = 0.5 * (sys.a_pi + sys.a_pi.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericError("assemble: eigensolver failed");
    if (es.eigenvalues().maxCoeff() >= 0.0)
        throw AssumptionError("A not negative definite: max eigenvalue of symmetrised A_pi is " +
                              std::to_string(es.eigenvalues().maxCoeff()));

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.a_pi);
    sys.theta_pi = lu.solve(-sys.b_pi);
    if ((sys.a_pi * sys.theta_pi + sys.b_pi).norm() > 1e-10 * std::max(1.0, sys.b_pi.norm()))
        throw NumericError("assemble: theta_pi solve exceeded residual tolerance");
    return sys;
}

Eigen::VectorXd exact_q(const MdpSpec& spec, const ChainAnalysis& ca) {
    const Eigen::VectorXd r_bar = expected_reward(spec).r_bar;
    Eigen::VectorXd q = ca.fundamental() * r_bar;
    if ((q - (r_bar + ca.p_pi() * q)).lpNorm<Eigen::Infinity>() >
        1e-10 * std::max(1.0, q.lpNorm<Eigen::Infinity>()))
        throw NumericError("exact_q: Bellman residual exceeded tolerance");
    return q;
}

Eigen::VectorXd bellman_op(const Eigen::VectorXd& q, const MdpSpec& spec, const ChainAnalysis& ca) {
    if (q.size() != ca.p_pi().rows()) throw std::invalid_argument("bellman_op: dimension mismatch");
    return expected_reward(spec).r_bar + ca.p_pi() * q;
}

Eigen::VectorXd project(const Eigen::VectorXd& q, const FeatureMatrix& phi, const ChainAnalysis& ca) {
    if (q.size() != phi.matrix().rows()) throw std::invalid_argument("project: dimension mismatch");
    const Eigen::MatrixXd gram =
        phi.matrix().transpose() * (ca.eta_pi().asDiagonal() * phi.matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw NumericError("project: eigensolver failed");
    if (es.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw AssumptionError("project: Gram matrix Phi^T D_pi Phi is singular");
    const Eigen::VectorXd coeffs =
        es.eigenvectors() *
        (es.eigenvectors().transpose() * (phi.matrix().transpose() * ca.eta_pi().cwiseProduct(q)))
            .cwiseQuotient(es.eigenvalues());
    return phi.matrix() * coeffs;
}

Eigen::VectorXd s_vec(const Eigen::VectorXd& theta, const MdpSpec& spec, const FeatureMatrix& phi,
                      const ChainAnalysis& ca) {
    const Eigen::VectorXd q = phi.matrix() * theta;
    const Eigen::VectorXd diff = bellman_op(q, spec, ca) - q;
    return phi.matrix().transpose() * ca.eta_pi().cwiseProduct(diff);
}

Eigen::VectorXd f_alpha(const Eigen::VectorXd& theta, double alpha, const MdpSpec& spec,
                        const FeatureMatrix& phi, const ChainAnalysis& ca) {
    if (!(alpha > 0.0)) throw std::invalid_argument("f_alpha: alpha must be positive");
    return theta + alpha * s_vec(theta, spec, phi, ca);
}

namespace {

// quasi-contraction constants over sampled policies: C1 from the coercivity
// of A_pi, C2 from its squared spectral norm
double initial_alpha(const PolicyFamily& family, const MdpSpec& spec, const FeatureMatrix& phi,
                     const CoupledFixedPointConfig& cfg) {
    double c1 = std::numeric_limits<double>::infinity();
    double c2 = 0.0;
    std::mt19937_64 rng = stream_rng(cfg.seed, 0xa1f);
    for (int k = 0; k < std::max(1, cfg.constant_estimation_samples); ++k) {
        Eigen::VectorXd theta(phi.dim());
        for (int i = 0; i < phi.dim(); ++i)
            theta[i] = cfg.constant_estimation_radius * (2.0 * uniform01(rng) - 1.0);
        const PolicyTable pi = family.evaluate(theta, phi, spec.num_transient(), spec.num_actions());
        const ChainAnalysis ca(spec, pi);
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        td_matrices(spec, phi, ca, a, b);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
        c1 = std::min(c1, -es.eigenvalues().maxCoeff());
        c2 = std::max(c2, a.operatorNorm() * a.operatorNorm());
    }
    if (!(c1 > 0.0) || !(c2 > 0.0)) return 1.0;
    return 2.0 * c1 / c2;
}

} // namespace

CoupledFixedPointResult solve_coupled_fixed_point(const PolicyFamily& family, const MdpSpec& spec,
                                                  const FeatureMatrix& phi,
                                                  const CoupledFixedPointConfig& config) {
    CoupledFixedPointResult result;
    Eigen::VectorXd theta = config.theta0.size() == phi.dim()
                                ? config.theta0
                                : Eigen::VectorXd::Zero(phi.dim());
    double alpha = initial_alpha(family, spec, phi, config);

    auto residual_at = [&](const Eigen::VectorXd& th, Eigen::VectorXd& s) {
        const PolicyTable pi = family.evaluate(th, phi, spec.num_transient(), spec.num_actions());
        const ChainAnalysis ca(spec, pi);
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        td_matrices(spec, phi, ca, a, b);
        s = a * th + b;
        return s.norm();
    };

    Eigen::VectorXd s;
    double res = residual_at(theta, s);
    const long history_stride = std::max<long>(1, config.max_iterations / 1000);
    result.residual_history.push_back(res);

    long it = 0;
    for (; it < config.max_iterations && res >= config.residual_tol; ++it) {
        const Eigen::VectorXd candidate = theta + alpha * s;
        Eigen::VectorXd s_next;
        const double res_next = residual_at(candidate, s_next);
        if (res_next < res) {
            theta = candidate;
            s = s_next;
            res = res_next;
        } else {
            alpha *= 0.5;
            if (alpha < 1e-18) break;
        }
        if (it % history_stride == 0) result.residual_history.push_back(res);
    }

    result.theta = theta;
    result.residual = res;
    result.iterations = it;
    result.converged = res < config.residual_tol;
    result.alpha_final = alpha;
    if (result.residual_history.empty() || result.residual_history.back() != res)
        result.residual_history.push_back(res);
    return result;
}

double multi_start_spread(const PolicyFamily& family, const MdpSpec& spec,
                          const FeatureMatrix& phi, int starts, double radius,
                          std::uint64_t seed, const CoupledFixedPointConfig& config) {
    std::vector<Eigen::VectorXd> points;
    for (int k = 0; k < starts; ++k) {
        std::mt19937_64 rng = stream_rng(seed, static_cast<std::uint64_t>(k));
        CoupledFixedPointConfig cfg = config;
        cfg.theta0 = Eigen::VectorXd(phi.dim());
        for (int i = 0; i < phi.dim(); ++i) cfg.theta0[i] = radius * (2.0 * uniform01(rng) - 1.0);
        const auto result = solve_coupled_fixed_point(family, spec, phi, cfg);
        if (result.converged) points.push_back(result.theta);
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            spread = std::max(spread, (points[i] - points[j]).norm());
    return spread;
}

} // namespace episarsa
