#pragma once

#include <Eigen/Dense>

namespace episarsa {

enum class VectorNorm { euclidean, one, infinity_ };
enum class MatrixNorm { spectral, infinity_, max };

double norm(const Eigen::VectorXd& x, VectorNorm kind);
double norm(const Eigen::MatrixXd& a, MatrixNorm kind);

/// Largest singular value via power iteration on AᵀA, relative tolerance 1e-10.
double spectral_norm(const Eigen::MatrixXd& a);

/// Upper estimate of the spectral radius of a nonnegative matrix.
///
/// Iterates the survival vector x ← Px from x = 1 and tracks the largest
/// component-wise growth ratio. For a substochastic chain the ratio converges
/// to the spectral radius; a recurrent (non-absorbing) class keeps it pinned
/// at 1, which is exactly the case the properness check must flag.
double nonnegative_spectral_radius(const Eigen::MatrixXd& p, int max_iterations = 2000);

} // namespace episarsa
