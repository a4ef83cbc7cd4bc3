#pragma once

#include "episarsa/linear_fa.hpp"
#include "episarsa/mdp.hpp"
#include "episarsa/policy_family.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace episarsa {

/// Named constants of the Lipschitz bounds and the square-integrability
/// bound. c_p is exact; zeta and xi are maxima over sampled epsilon-soft
/// policies and therefore lower bounds, which every report states.
struct ConstantsReport {
    double zeta = 0.0;    // sampled max ||(I - P_pi)^-1||
    double xi = 0.0;      // sampled max ||D_pi||
    double c_p = 0.0;     // |S||A|, exact
    double c_d = 0.0;     // zeta (1 + zeta c_p)
    double c_b = 0.0;     // c_d |S||A| Phi_max r_max
    double c_a = 0.0;     // |S||A| Phi_max^2 ((1 + sqrt(|S||A|)) c_d + xi c_p)
    double k_bound = 0.0; // 2 Phi_max^2 sqrt(|S||A|) (2 zeta + 1) zeta
    int sample_count = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

ConstantsReport compute_constants(const MdpSpec& spec, const FeatureMatrix& phi, double epsilon,
                                  int sample_count, std::uint64_t seed);

struct InequalityCheck {
    std::string name;
    double constant = 0.0;
    double max_ratio = 0.0; // max observed ||lhs|| / ||pi1 - pi2||
    int violations = 0;
    std::string worst_pair; // set when violations > 0
};

struct LipschitzBoundsReport {
    ConstantsReport constants;
    std::vector<InequalityCheck> checks; // P, D, b, A
    int pair_count = 0;
    bool pass = false;
};

/// Samples policy pairs from the epsilon-soft polytope and checks the four
/// Lipschitz inequalities against the constants above.
LipschitzBoundsReport check_lipschitz_bounds(const MdpSpec& spec, const FeatureMatrix& phi,
                                             double epsilon, int pair_count, std::uint64_t seed);

struct NegativeDefinitenessReport {
    double max_eigenvalue = 0.0; // max over samples of lambda_max(sym(A_pi))
    int sample_count = 0;
    double epsilon = 0.0;
    bool pass = false;
};

NegativeDefinitenessReport check_negative_definiteness(const MdpSpec& spec,
                                                       const FeatureMatrix& phi, double epsilon,
                                                       int sample_count, std::uint64_t seed);

struct SquareIntegrabilitySample {
    double theta_norm = 0.0;
    double mc_estimate = 0.0; // Monte-Carlo mean of ||H||^2
    double std_error = 0.0;
    double bound = 0.0; // k_bound (r_max^2 + 4 Phi_max^2 ||theta||^2)
    bool pass = false;
};

struct SquareIntegrabilityReport {
    std::vector<SquareIntegrabilitySample> samples;
    long episodes_per_sample = 0;
    double zeta = 0.0;
    bool pass = false;
};

/// Monte-Carlo E[||H(theta,X)||^2] against the closed-form bound, with
/// 3-standard-error slack, for thetas drawn uniformly from a ball.
SquareIntegrabilityReport check_square_integrability(const MdpSpec& spec, const FeatureMatrix& phi,
                                                     const PolicyFamily& family, int theta_samples,
                                                     long episodes, std::uint64_t seed,
                                                     double theta_radius = 10.0);

struct MeanFieldSample {
    double theta_norm = 0.0;
    double max_abs_deviation = 0.0; // max_i |mc_mean_i - analytic_i|
    double max_se_units = 0.0;      // same, in standard-error units
    bool pass = false;
};

struct MeanFieldReport {
    std::vector<MeanFieldSample> samples;
    long episodes_per_sample = 0;
    int comparisons = 0;                 // theta_samples * d
    double threshold_se_units = 3.0;     // Bonferroni-adjusted per-component cutoff
    double familywise_error_bound = 0.0; // = comparisons * P(|Z| > threshold) <= P(|Z| > 3)
    bool pass = false;
};

/// Monte-Carlo mean of H against the analytic mean field A_{pi_theta} theta +
/// b_{pi_theta}, componentwise. The per-component cutoff is 3 standard errors
/// Bonferroni-corrected across all comparisons, so the family-wise
/// false-failure probability stays within the nominal 3-sigma budget. An
/// exact match is required where the standard error vanishes.
MeanFieldReport check_mean_field(const MdpSpec& spec, const FeatureMatrix& phi,
                                 const PolicyFamily& family, int theta_samples, long episodes,
                                 std::uint64_t seed, double theta_radius = 10.0);

struct StabilityGridConfig {
    double nu = 0.1; // shell nu <= ||theta - theta*|| <= 1/nu
    int directions = 8;
    int radii = 5;
    int lipschitz_samples = 128;
    double lipschitz_radius = 10.0;
};

struct StabilityMarginReport {
    bool certified = false;
    double worst_value = 0.0;      // max over the grid of (theta-theta*)^T h(theta)
    std::string worst_point;       // set when not certified
    double lipschitz_estimate = 0.0;    // sampled C-hat
    double c1_hat = 0.0;                // c_a * C-hat
    double c2_hat = 0.0;                // c_b * C-hat
    double max_shifted_eigenvalue = 0.0; // max lambda_max(sym(A) + (C1|theta*| + C2) I)
    int grid_points = 0;
};

/// Evaluates (theta - theta*)^T (A_{pi_theta} theta + b_{pi_theta}) on a
/// deterministic shell grid around theta*. "Not certified" is a property of
/// the instance/family (large Lipschitz constant), not a tool failure.
StabilityMarginReport check_stability_margin(const MdpSpec& spec, const FeatureMatrix& phi,
                                             const PolicyFamily& family,
                                             const Eigen::VectorXd& theta_star,
                                             const StabilityGridConfig& grid, std::uint64_t seed);

struct ContractionCasesReport {
    // case i:  lambda(s) > 0 for every transient state (policy-independent
    //          for eps-soft policies)
    // case ii: every row keeps strictly less than unit transient mass
    //          (policy-independent outright)
    bool case_i = false;
    bool case_ii = false;
    double case_ii_beta = 0.0;        // max transient row mass, exact
    double case_i_beta_uniform = 0.0; // beta of the uniform policy when case i holds
    std::string suggestion;           // set when neither case holds
};

/// Instance-level availability of the two contraction hypotheses. When
/// neither holds the report suggests discount_transform, which restores
/// case ii for any gamma < 1.
ContractionCasesReport check_contraction_cases(const MdpSpec& spec);

struct CertificationConfig {
    double epsilon = 0.05;
    int sample_count = 1000;
    int pair_count = 1000;
    int theta_samples = 20;
    long episodes_per_theta = 20000;
    double theta_radius = 10.0;
    StabilityGridConfig stability;
    std::uint64_t seed = 7;
};

struct CertificationSuiteReport {
    ConstantsReport constants;
    ContractionCasesReport contraction_cases;
    LipschitzBoundsReport lipschitz;
    NegativeDefinitenessReport negative_definiteness;
    SquareIntegrabilityReport square_integrability;
    MeanFieldReport mean_field;
    StabilityMarginReport stability;
    bool theta_star_converged = false;
    double theta_star_residual = 0.0;
    bool pass = false;
};

/// Runs every check (independent jobs run concurrently, reports merged in
/// fixed order). theta* for the stability check comes from
/// solve_coupled_fixed_point on the given family.
CertificationSuiteReport run_certification(const MdpSpec& spec, const FeatureMatrix& phi,
                                           const PolicyFamily& family,
                                           const CertificationConfig& config);

std::string to_json(const CertificationSuiteReport& report);
std::string to_text(const CertificationSuiteReport& report);

} // namespace episarsa
