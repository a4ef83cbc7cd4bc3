#include "episarsa/certification.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/norms.hpp"
#include "episarsa/rng.hpp"
#include "episarsa/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <tuple>

namespace episarsa {

namespace {

Eigen::VectorXd draw_theta_in_ball(int d, double radius, std::mt19937_64& rng) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = standard_normal(rng);
    const double n = v.norm();
    if (n == 0.0) return Eigen::VectorXd::Zero(d);
    return v * (radius * std::pow(uniform01(rng), 1.0 / d) / n);
}

// nested stream seed; plain master+k arithmetic would alias streams across
// nearby master seeds
std::uint64_t subseed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t k) {
    std::uint64_t s = seed;
    splitmix64(s);
    s ^= purpose * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    s ^= k * 0xbf58476d1ce4e5b9ULL;
    return splitmix64(s);
}

// P(|Z| > 3), the family-wise false-failure budget of the mean-field check
constexpr double kThreeSigmaTail = 0.0026997960632601866;

// z with P(|Z| > z) = alpha, by bisection on the complementary error function
double two_sided_tail_quantile(double alpha) {
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > alpha) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

ConstantsReport compute_constants(const MdpSpec& spec, const FeatureMatrix& phi, double epsilon,
                                  int sample_count, std::uint64_t seed) {
    ConstantsReport report;
    report.sample_count = sample_count;
    report.epsilon = epsilon;
    report.seed = seed;

    const double n_pairs = static_cast<double>(spec.num_pairs());
    double zeta = 0.0;
    double xi = 0.0;
    for (int k = 0; k < sample_count; ++k) {
        const PolicyTable pi = sample_delta_eps(spec, epsilon, subseed(seed, 0x01, static_cast<std::uint64_t>(k)));
        const ChainAnalysis ca(spec, pi); // throws AssumptionError if not proper
        zeta = std::max(zeta, spectral_norm(ca.fundamental()));
        xi = std::max(xi, ca.eta_pi().maxCoeff()); // spectral norm of a diagonal matrix
    }
    report.zeta = zeta;
    report.xi = xi;
    report.c_p = n_pairs;
    report.c_d = zeta * (1.0 + zeta * report.c_p);
    report.c_b = report.c_d * n_pairs * phi.phi_max() * spec.r_max();
    report.c_a = n_pairs * phi.phi_max() * phi.phi_max() *
                 ((1.0 + std::sqrt(n_pairs)) * report.c_d + xi * report.c_p);
    report.k_bound =
        2.0 * phi.phi_max() * phi.phi_max() * std::sqrt(n_pairs) * (2.0 * zeta + 1.0) * zeta;
    return report;
}

LipschitzBoundsReport check_lipschitz_bounds(const MdpSpec& spec, const FeatureMatrix& phi,
                                             double epsilon, int pair_count, std::uint64_t seed) {
    LipschitzBoundsReport report;
    report.pair_count = pair_count;
    report.constants = compute_constants(spec, phi, epsilon, pair_count, seed);

    report.checks = {
        {"||P_pi1 - P_pi2|| <= C_P ||pi1 - pi2||", report.constants.c_p, 0.0, 0, ""},
        {"||D_pi1 - D_pi2|| <= C_D ||pi1 - pi2||", report.constants.c_d, 0.0, 0, ""},
        {"||b_pi1 - b_pi2|| <= C_b ||pi1 - pi2||", report.constants.c_b, 0.0, 0, ""},
        {"||A_pi1 - A_pi2|| <= C_A ||pi1 - pi2||", report.constants.c_a, 0.0, 0, ""},
    };

    for (int k = 0; k < pair_count; ++k) {
        const PolicyTable pi1 = sample_delta_eps(spec, epsilon, subseed(seed, 0x02, static_cast<std::uint64_t>(2 * k)));
        const PolicyTable pi2 = sample_delta_eps(spec, epsilon, subseed(seed, 0x02, static_cast<std::uint64_t>(2 * k + 1)));
        const double dist = (pi1.matrix() - pi2.matrix()).norm();
        if (dist == 0.0) continue; // identical pair: every ratio is 0

        const ChainAnalysis ca1(spec, pi1);
        const ChainAnalysis ca2(spec, pi2);
        Eigen::MatrixXd a1, a2;
        Eigen::VectorXd b1, b2;
        td_matrices(spec, phi, ca1, a1, b1);
        td_matrices(spec, phi, ca2, a2, b2);

        const double lhs[4] = {
            spectral_norm(ca1.p_pi() - ca2.p_pi()),
            (ca1.eta_pi() - ca2.eta_pi()).lpNorm<Eigen::Infinity>(), // ||D1 - D2|| for diagonals
            (b1 - b2).norm(),
            spectral_norm(a1 - a2),
        };
        for (int c = 0; c < 4; ++c) {
            const double ratio = lhs[c] / dist;
            report.checks[static_cast<std::size_t>(c)].max_ratio =
                std::max(report.checks[static_cast<std::size_t>(c)].max_ratio, ratio);
            if (ratio > report.checks[static_cast<std::size_t>(c)].constant) {
                ++report.checks[static_cast<std::size_t>(c)].violations;
                if (report.checks[static_cast<std::size_t>(c)].worst_pair.empty())
                    report.checks[static_cast<std::size_t>(c)].worst_pair =
                        "pair seed offset " + std::to_string(2 * k);
            }
        }
    }
    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.violations == 0;
    return report;
}

NegativeDefinitenessReport check_negative_definiteness(const MdpSpec& spec,
                                                       const FeatureMatrix& phi, double epsilon,
                                                       int sample_count, std::uint64_t seed) {
    NegativeDefinitenessReport report;
    report.sample_count = sample_count;
    report.epsilon = epsilon;
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < sample_count; ++k) {
        const PolicyTable pi = sample_delta_eps(spec, epsilon, subseed(seed, 0x03, static_cast<std::uint64_t>(k)));
        const ChainAnalysis ca(spec, pi);
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        td_matrices(spec, phi, ca, a, b);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
        worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
    report.max_eigenvalue = worst;
    report.pass = worst < 0.0;
    return report;
}

SquareIntegrabilityReport check_square_integrability(const MdpSpec& spec, const FeatureMatrix& phi,
                                                     const PolicyFamily& family, int theta_samples,
                                                     long episodes, std::uint64_t seed,
                                                     double theta_radius) {
    SquareIntegrabilityReport report;
    report.episodes_per_sample = episodes;
    const ConstantsReport constants =
        compute_constants(spec, phi, family.epsilon(), 200, subseed(seed, 0x06, 0));
    report.zeta = constants.zeta;

    std::mt19937_64 theta_rng = stream_rng(seed, 0x51ULL);
    report.pass = true;
    for (int k = 0; k < theta_samples; ++k) {
        const Eigen::VectorXd theta = draw_theta_in_ball(phi.dim(), theta_radius, theta_rng);
        const PolicyTable pi = family.evaluate(theta, phi, spec.num_transient(), spec.num_actions());

        double sum = 0.0;
        double sum_sq = 0.0;
        for (long e = 0; e < episodes; ++e) {
            std::mt19937_64 rng =
                stream_rng(subseed(seed, 0x04, static_cast<std::uint64_t>(k)), static_cast<std::uint64_t>(e));
            const Trajectory traj = simulate_episode(spec, pi, rng);
            const double h2 = h_of(theta, traj, spec, phi).squaredNorm();
            sum += h2;
            sum_sq += h2 * h2;
        }
        const double n = static_cast<double>(episodes);
        const double mean = sum / n;
        const double var = std::max(0.0, sum_sq / n - mean * mean);
        SquareIntegrabilitySample sample;
        sample.theta_norm = theta.norm();
        sample.mc_estimate = mean;
        sample.std_error = std::sqrt(var / n);
        sample.bound = constants.k_bound *
                       (spec.r_max() * spec.r_max() +
                        4.0 * phi.phi_max() * phi.phi_max() * theta.squaredNorm());
        sample.pass = mean <= sample.bound + 3.0 * sample.std_error;
        report.pass = report.pass && sample.pass;
        report.samples.push_back(sample);
    }
    return report;
}

MeanFieldReport check_mean_field(const MdpSpec& spec, const FeatureMatrix& phi,
                                 const PolicyFamily& family, int theta_samples, long episodes,
                                 std::uint64_t seed, double theta_radius) {
    MeanFieldReport report;
    report.episodes_per_sample = episodes;
    report.comparisons = theta_samples * phi.dim();
    report.threshold_se_units =
        two_sided_tail_quantile(kThreeSigmaTail / std::max(1, report.comparisons));
    report.familywise_error_bound =
        report.comparisons * std::erfc(report.threshold_se_units / std::sqrt(2.0));

    std::mt19937_64 theta_rng = stream_rng(seed, 0x52ULL);
    report.pass = true;
    const int d = phi.dim();
    for (int k = 0; k < theta_samples; ++k) {
        const Eigen::VectorXd theta = draw_theta_in_ball(d, theta_radius, theta_rng);
        const PolicyTable pi = family.evaluate(theta, phi, spec.num_transient(), spec.num_actions());
        const ChainAnalysis ca(spec, pi);
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        td_matrices(spec, phi, ca, a, b);
        const Eigen::VectorXd analytic = a * theta + b;

        Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
        Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(d);
        for (long e = 0; e < episodes; ++e) {
            std::mt19937_64 rng =
                stream_rng(subseed(seed, 0x05, static_cast<std::uint64_t>(k)), static_cast<std::uint64_t>(e));
            const Trajectory traj = simulate_episode(spec, pi, rng);
            const Eigen::VectorXd h = h_of(theta, traj, spec, phi);
            sum += h;
            sum_sq += h.cwiseProduct(h);
        }
        const double n = static_cast<double>(episodes);
        MeanFieldSample sample;
        sample.theta_norm = theta.norm();
        sample.pass = true;
        for (int i = 0; i < d; ++i) {
            const double mean = sum[i] / n;
            const double var = std::max(0.0, sum_sq[i] / n - mean * mean);
            const double se = std::sqrt(var / n);
            const double dev = std::abs(mean - analytic[i]);
            sample.max_abs_deviation = std::max(sample.max_abs_deviation, dev);
            if (se == 0.0) {
                // deterministic component: demand an exact match
                if (dev > 1e-12) sample.pass = false;
            } else {
                sample.max_se_units = std::max(sample.max_se_units, dev / se);
                if (dev > report.threshold_se_units * se) sample.pass = false;
            }
        }
        report.pass = report.pass && sample.pass;
        report.samples.push_back(sample);
    }
    return report;
}

StabilityMarginReport check_stability_margin(const MdpSpec& spec, const FeatureMatrix& phi,
                                             const PolicyFamily& family,
                                             const Eigen::VectorXd& theta_star,
                                             const StabilityGridConfig& grid, std::uint64_t seed) {
    StabilityMarginReport report;
    const int d = phi.dim();

    report.lipschitz_estimate = estimate_lipschitz(family, phi, spec.num_transient(),
                                                   spec.num_actions(), grid.lipschitz_samples,
                                                   grid.lipschitz_radius, subseed(seed, 0x07, 0));
    const ConstantsReport constants =
        compute_constants(spec, phi, family.epsilon(), 200, subseed(seed, 0x08, 0));
    report.c1_hat = constants.c_a * report.lipschitz_estimate;
    report.c2_hat = constants.c_b * report.lipschitz_estimate;

    std::mt19937_64 rng = stream_rng(seed, 0x57ULL);
    std::vector<Eigen::VectorXd> directions;
    for (int k = 0; k < grid.directions; ++k) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = standard_normal(rng);
        if (v.norm() == 0.0) continue;
        directions.push_back(v.normalized());
    }

    report.certified = true;
    report.worst_value = -std::numeric_limits<double>::infinity();
    report.max_shifted_eigenvalue = -std::numeric_limits<double>::infinity();
    const double log_lo = std::log(grid.nu);
    const double log_hi = std::log(1.0 / grid.nu);
    for (int r = 0; r < grid.radii; ++r) {
        const double f = grid.radii == 1 ? 0.5 : static_cast<double>(r) / (grid.radii - 1);
        const double radius = std::exp(log_lo + f * (log_hi - log_lo));
        for (std::size_t kd = 0; kd < directions.size(); ++kd) {
            const Eigen::VectorXd theta = theta_star + radius * directions[kd];
            const PolicyTable pi =
                family.evaluate(theta, phi, spec.num_transient(), spec.num_actions());
            const ChainAnalysis ca(spec, pi);
            Eigen::MatrixXd a;
            Eigen::VectorXd b;
            td_matrices(spec, phi, ca, a, b);
            const double value = (theta - theta_star).dot(a * theta + b);
            ++report.grid_points;
            if (value > report.worst_value) {
                report.worst_value = value;
                if (value >= 0.0)
                    report.worst_point = "radius " + std::to_string(radius) + ", direction " +
                                         std::to_string(kd);
            }
            if (value >= 0.0) report.certified = false;

            const double shift = report.c1_hat * theta_star.norm() + report.c2_hat;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                0.5 * (a + a.transpose()) + shift * Eigen::MatrixXd::Identity(d, d));
            report.max_shifted_eigenvalue =
                std::max(report.max_shifted_eigenvalue, es.eigenvalues().maxCoeff());
        }
    }
    return report;
}

ContractionCasesReport check_contraction_cases(const MdpSpec& spec) {
    ContractionCasesReport report;
    report.case_i = spec.num_transient() > 0;
    for (int s = 0; s < spec.num_transient(); ++s)
        if (!(spec.initial_dist()[s] > 0.0)) report.case_i = false;

    double max_transient_mass = 0.0;
    for (int s = 0; s < spec.num_transient(); ++s)
        for (int a = 0; a < spec.num_actions(); ++a) {
            double mass = 0.0;
            for (int sn = 0; sn < spec.num_transient(); ++sn)
                mass += spec.transition_prob(s, a, sn);
            max_transient_mass = std::max(max_transient_mass, mass);
        }
    report.case_ii = max_transient_mass < 1.0 - 1e-12;
    report.case_ii_beta = max_transient_mass;

    if (report.case_i) {
        const ChainAnalysis ca(spec,
                               PolicyTable::uniform(spec.num_transient(), spec.num_actions()));
        report.case_i_beta_uniform = contraction_coefficient(ca, ContractionCase::case_i);
    }
    if (!report.case_i && !report.case_ii)
        report.suggestion =
            "neither contraction case holds (a zero-mass start state and a unit transient "
            "row); apply discount_transform to restore case ii";
    return report;
}

CertificationSuiteReport run_certification(const MdpSpec& spec, const FeatureMatrix& phi,
                                           const PolicyFamily& family,
                                           const CertificationConfig& config) {
    CertificationSuiteReport report;
    report.contraction_cases = check_contraction_cases(spec);

    auto constants_job = std::async(std::launch::async, [&] {
        return compute_constants(spec, phi, config.epsilon, config.sample_count, config.seed);
    });
    auto lipschitz_job = std::async(std::launch::async, [&] {
        return check_lipschitz_bounds(spec, phi, config.epsilon, config.pair_count, config.seed);
    });
    auto negdef_job = std::async(std::launch::async, [&] {
        return check_negative_definiteness(spec, phi, config.epsilon, config.sample_count,
                                           config.seed);
    });
    auto square_job = std::async(std::launch::async, [&] {
        return check_square_integrability(spec, phi, family, config.theta_samples,
                                          config.episodes_per_theta, config.seed,
                                          config.theta_radius);
    });
    auto mean_job = std::async(std::launch::async, [&] {
        return check_mean_field(spec, phi, family, config.theta_samples, config.episodes_per_theta,
                                config.seed, config.theta_radius);
    });
    auto stability_job = std::async(std::launch::async, [&] {
        CoupledFixedPointConfig fp;
        fp.seed = config.seed;
        const auto fixed_point = solve_coupled_fixed_point(family, spec, phi, fp);
        const auto stability = check_stability_margin(spec, phi, family, fixed_point.theta,
                                                      config.stability, config.seed);
        return std::make_tuple(fixed_point.converged, fixed_point.residual, stability);
    });

    report.constants = constants_job.get();
    report.lipschitz = lipschitz_job.get();
    report.negative_definiteness = negdef_job.get();
    report.square_integrability = square_job.get();
    report.mean_field = mean_job.get();
    auto [converged, residual, stability] = stability_job.get();
    report.theta_star_converged = converged;
    report.theta_star_residual = residual;
    report.stability = stability;

    report.pass = report.lipschitz.pass && report.negative_definiteness.pass &&
                  report.square_integrability.pass && report.mean_field.pass &&
                  report.stability.certified && report.theta_star_converged;
    return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json constants_json(const ConstantsReport& c) {
    return ordered_json{{"zeta", c.zeta},
                        {"xi", c.xi},
                        {"c_p", c.c_p},
                        {"c_d", c.c_d},
                        {"c_b", c.c_b},
                        {"c_a", c.c_a},
                        {"k_bound", c.k_bound},
                        {"sample_count", c.sample_count},
                        {"epsilon", c.epsilon},
                        {"seed", c.seed},
                        {"note", "c_p exact; zeta/xi sampled maxima (lower bounds), derived "
                                 "constants inherit the lower-bound status"}};
}

} // namespace

std::string to_json(const CertificationSuiteReport& report) {
    ordered_json doc;
    doc["pass"] = report.pass;
    doc["constants"] = constants_json(report.constants);
    doc["contraction_cases"] =
        ordered_json{{"case_i", report.contraction_cases.case_i},
                     {"case_ii", report.contraction_cases.case_ii},
                     {"case_ii_beta", report.contraction_cases.case_ii_beta},
                     {"case_i_beta_uniform", report.contraction_cases.case_i_beta_uniform},
                     {"suggestion", report.contraction_cases.suggestion}};

    ordered_json checks = ordered_json::array();
    for (const auto& c : report.lipschitz.checks)
        checks.push_back(ordered_json{{"inequality", c.name},
                                      {"constant", c.constant},
                                      {"max_ratio", c.max_ratio},
                                      {"violations", c.violations},
                                      {"worst_pair", c.worst_pair}});
    doc["lipschitz"] = ordered_json{{"pass", report.lipschitz.pass},
                                    {"pair_count", report.lipschitz.pair_count},
                                    {"constants", constants_json(report.lipschitz.constants)},
                                    {"checks", checks}};

    doc["negative_definiteness"] =
        ordered_json{{"pass", report.negative_definiteness.pass},
                     {"max_eigenvalue", report.negative_definiteness.max_eigenvalue},
                     {"sample_count", report.negative_definiteness.sample_count},
                     {"epsilon", report.negative_definiteness.epsilon}};

    ordered_json sq = ordered_json::array();
    for (const auto& s : report.square_integrability.samples)
        sq.push_back(ordered_json{{"theta_norm", s.theta_norm},
                                  {"mc_estimate", s.mc_estimate},
                                  {"std_error", s.std_error},
                                  {"bound", s.bound},
                                  {"pass", s.pass}});
    doc["square_integrability"] =
        ordered_json{{"pass", report.square_integrability.pass},
                     {"episodes_per_sample", report.square_integrability.episodes_per_sample},
                     {"zeta", report.square_integrability.zeta},
                     {"samples", sq}};

    ordered_json mf = ordered_json::array();
    for (const auto& s : report.mean_field.samples)
        mf.push_back(ordered_json{{"theta_norm", s.theta_norm},
                                  {"max_abs_deviation", s.max_abs_deviation},
                                  {"max_se_units", s.max_se_units},
                                  {"pass", s.pass}});
    doc["mean_field"] = ordered_json{
        {"pass", report.mean_field.pass},
        {"episodes_per_sample", report.mean_field.episodes_per_sample},
        {"comparisons", report.mean_field.comparisons},
        {"threshold_se_units", report.mean_field.threshold_se_units},
        {"familywise_error_bound", report.mean_field.familywise_error_bound},
        {"threshold", "per-component cutoff Bonferroni-corrected across comparisons; "
                      "family-wise false-failure probability held at the 3-sigma budget"},
        {"samples", mf}};

    doc["stability"] = ordered_json{
        {"certified", report.stability.certified},
        {"status", report.stability.certified ? "certified" : "condition not certified"},
        {"worst_value", report.stability.worst_value},
        {"worst_point", report.stability.worst_point},
        {"lipschitz_estimate", report.stability.lipschitz_estimate},
        {"c1_hat", report.stability.c1_hat},
        {"c2_hat", report.stability.c2_hat},
        {"max_shifted_eigenvalue", report.stability.max_shifted_eigenvalue},
        {"grid_points", report.stability.grid_points}};
    doc["theta_star"] = ordered_json{{"converged", report.theta_star_converged},
                                     {"residual", report.theta_star_residual}};
    return doc.dump(2);
}

std::string to_text(const CertificationSuiteReport& report) {
    std::ostringstream out;
    auto line = [&](const std::string& name, bool pass, const std::string& detail) {
        out << (pass ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    };
    out << "certification report (zeta/xi sampled lower bounds; c_p exact)\n";
    out << "constants: zeta=" << report.constants.zeta << " xi=" << report.constants.xi
        << " c_p=" << report.constants.c_p << " c_d=" << report.constants.c_d
        << " c_b=" << report.constants.c_b << " c_a=" << report.constants.c_a
        << " k_bound=" << report.constants.k_bound << "\n";
    out << "contraction cases: case_i=" << (report.contraction_cases.case_i ? "yes" : "no")
        << " case_ii=" << (report.contraction_cases.case_ii ? "yes" : "no")
        << " (max transient row mass " << report.contraction_cases.case_ii_beta << ")";
    if (!report.contraction_cases.suggestion.empty())
        out << "\n  " << report.contraction_cases.suggestion;
    out << "\n";
    for (const auto& c : report.lipschitz.checks) {
        std::ostringstream detail;
        detail << "max ratio " << c.max_ratio << " vs constant " << c.constant << " ("
               << c.violations << " violations)";
        line(c.name, c.violations == 0, detail.str());
    }
    {
        std::ostringstream detail;
        detail << "max eigenvalue " << report.negative_definiteness.max_eigenvalue << " over "
               << report.negative_definiteness.sample_count << " samples";
        line("A_pi negative definite", report.negative_definiteness.pass, detail.str());
    }
    {
        std::ostringstream detail;
        detail << report.square_integrability.samples.size() << " thetas, "
               << report.square_integrability.episodes_per_sample << " episodes each";
        line("square integrability bound", report.square_integrability.pass, detail.str());
    }
    {
        std::ostringstream detail;
        detail << report.mean_field.comparisons << " comparisons at "
               << report.mean_field.threshold_se_units
               << " SE (Bonferroni; family-wise false-failure bound "
               << report.mean_field.familywise_error_bound << ")";
        line("mean field identity", report.mean_field.pass, detail.str());
    }
    {
        std::ostringstream detail;
        detail << "worst grid value " << report.stability.worst_value << " over "
               << report.stability.grid_points << " points";
        if (!report.stability.certified) detail << " -- condition not certified";
        line("stability margin", report.stability.certified, detail.str());
    }
    out << (report.pass ? "PASS" : "FAIL") << " overall\n";
    return out.str();
}

} // namespace episarsa
