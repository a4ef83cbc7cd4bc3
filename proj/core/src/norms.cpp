#include "episarsa/norms.hpp"

#include "episarsa/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace episarsa {

double norm(const Eigen::VectorXd& x, VectorNorm kind) {
    switch (kind) {
        case VectorNorm::euclidean: return x.norm();
        case VectorNorm::one: return x.lpNorm<1>();
        case VectorNorm::infinity_: return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
    }
    throw std::invalid_argument("unknown vector norm");
}

double norm(const Eigen::MatrixXd& a, MatrixNorm kind) {
    switch (kind) {
        case MatrixNorm::spectral: return spectral_norm(a);
        case MatrixNorm::infinity_: return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
        case MatrixNorm::max: return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
    }
    throw std::invalid_argument("unknown matrix norm");
}

double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    const Eigen::Index n = a.cols();

    // fixed pseudo-random start so results are reproducible and the start
    // is not orthogonal to the top singular vector
    Eigen::VectorXd v(n);
    std::uint64_t s = 0x243f6a8885a308d3ULL;
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    v.normalize();

    double sigma2 = 0.0;
    constexpr double rel_tol = 1e-10;
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd w = a.transpose() * (a * v);
        const double lambda = v.dot(w); // Rayleigh quotient for AᵀA
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        v = w / wn;
        if (it > 0 && std::abs(lambda - sigma2) <= rel_tol * std::max(lambda, 1e-300)) {
            sigma2 = lambda;
            break;
        }
        sigma2 = lambda;
    }
    return std::sqrt(std::max(sigma2, 0.0));
}

double nonnegative_spectral_radius(const Eigen::MatrixXd& p, int max_iterations) {
    const Eigen::Index n = p.rows();
    if (n == 0) return 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    double estimate = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd y = p * x;
        double ratio = 0.0;
        bool any = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x[i] > 0.0) {
                ratio = std::max(ratio, y[i] / x[i]);
                any = true;
            }
        }
        if (!any) return 0.0;
        const double prev = estimate;
        estimate = ratio;
        if (it > static_cast<int>(n) && std::abs(estimate - prev) < 1e-12) break;
        const double top = y.maxCoeff();
        if (top <= 0.0) return 0.0;
        x = y / top; // rescale; ratios are scale-invariant
    }
    return estimate;
}

} // namespace episarsa
