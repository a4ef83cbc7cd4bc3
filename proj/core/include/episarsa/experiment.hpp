#pragma once

#include "episarsa/certification.hpp"
#include "episarsa/linear_fa.hpp"
#include "episarsa/mdp.hpp"
#include "episarsa/policy_family.hpp"
#include "episarsa/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace episarsa {

enum class RunMode { train, certify, oracle, all };

/// A fully-resolved experiment: MDP + features + family + schedule + budgets.
/// Loaded from a single versioned JSON document; unknown keys are rejected
/// and all referenced files must parse. See docs in README for the schema.
struct ExperimentConfig {
    int version = 1;
    std::filesystem::path mdp_path;
    std::string feature_kind = "tabular"; // "tabular" | "matrix"
    std::filesystem::path feature_path;   // for "matrix"
    std::string family_kind = "eps_soft_softmax";
    double family_epsilon = 0.05;
    double family_temperature = 8.0;
    std::optional<Eigen::MatrixXd> family_policy; // constant family; empty = uniform
    bool nonconvergent_demo = false;
    StepSchedule schedule;
    long episodes = 1;
    std::vector<std::uint64_t> seeds;
    long report_cadence = 1000;
    std::filesystem::path output_dir = "out";
    RunMode mode = RunMode::all;
    CertificationConfig certify;

    static ExperimentConfig load_file(const std::filesystem::path& path);
    static ExperimentConfig load_json(const std::string& text,
                                      const std::filesystem::path& base_dir);
};

struct LoadedExperiment {
    MdpSpec spec;
    FeatureMatrix phi;
    PolicyFamily family;
};

/// Resolves the config against the filesystem: loads and validates the MDP
/// (AssumptionError on a non-empty validation report), builds the feature
/// matrix and the policy family.
LoadedExperiment load_experiment(const ExperimentConfig& config);

/// Executes the configured mode(s) and writes artifacts into output_dir:
///   train   -> history_seed<k>.csv per seed + summary.json
///   certify -> certification.json (+ text table on the log stream)
///   oracle  -> oracle.json
/// Returns 0 when every executed check passed, 1 otherwise. Outputs are
/// byte-identical across runs for identical (config, seeds).
int run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

} // namespace episarsa
