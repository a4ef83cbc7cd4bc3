#include "episarsa/experiment.hpp"

#include "episarsa/errors.hpp"
#include "episarsa/mdp_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <ostream>
#include <set>
#include <sstream>

namespace episarsa {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ParseError("config: unknown key '" + key + "' in " + where);
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

ExperimentConfig ExperimentConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_json(buf.str(), path.parent_path());
}

ExperimentConfig ExperimentConfig::load_json(const std::string& text,
                                             const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config: top level must be an object");
    reject_unknown(doc,
                   {"version", "mdp", "features", "family", "nonconvergent_demo", "schedule",
                    "episodes", "seeds", "report_cadence", "output_dir", "mode", "certify"},
                   "top level");

    ExperimentConfig cfg;
    if (!doc.contains("version") || !doc["version"].is_number_integer())
        throw ParseError("config: missing integer 'version'");
    cfg.version = doc["version"].get<int>();
    if (cfg.version != 1) throw ParseError("config: unsupported version");

    if (!doc.contains("mdp") || !doc["mdp"].is_string())
        throw ParseError("config: missing string 'mdp'");
    cfg.mdp_path = base_dir / doc["mdp"].get<std::string>();

    if (doc.contains("features")) {
        const auto& f = doc["features"];
        reject_unknown(f, {"kind", "path"}, "features");
        cfg.feature_kind = f.value("kind", "tabular");
        if (cfg.feature_kind == "matrix") {
            if (!f.contains("path") || !f["path"].is_string())
                throw ParseError("config: features.kind 'matrix' requires 'path'");
            cfg.feature_path = base_dir / f["path"].get<std::string>();
        } else if (cfg.feature_kind != "tabular") {
            throw ParseError("config: features.kind must be 'tabular' or 'matrix'");
        }
    }

    if (doc.contains("family")) {
        const auto& f = doc["family"];
        reject_unknown(f, {"kind", "epsilon", "temperature", "policy"}, "family");
        cfg.family_kind = f.value("kind", "eps_soft_softmax");
        if (f.contains("epsilon")) cfg.family_epsilon = f["epsilon"].get<double>();
        if (f.contains("temperature")) cfg.family_temperature = f["temperature"].get<double>();
        if (f.contains("policy")) {
            if (f["policy"].is_string() && f["policy"].get<std::string>() == "uniform") {
                // empty optional = uniform
            } else if (f["policy"].is_array()) {
                const auto& rows = f["policy"];
                const std::size_t nrows = rows.size();
                if (nrows == 0) throw ParseError("config: family.policy must be non-empty");
                const std::size_t ncols = rows[0].size();
                Eigen::MatrixXd m(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
                for (std::size_t s = 0; s < nrows; ++s) {
                    if (!rows[s].is_array() || rows[s].size() != ncols)
                        throw ParseError("config: family.policy rows must have equal length");
                    for (std::size_t a = 0; a < ncols; ++a)
                        m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
                            rows[s][a].get<double>();
                }
                cfg.family_policy = std::move(m);
            } else {
                throw ParseError("config: family.policy must be 'uniform' or a matrix");
            }
        }
    }
    if (doc.contains("nonconvergent_demo")) cfg.nonconvergent_demo = doc["nonconvergent_demo"].get<bool>();
    if (cfg.family_kind == "eps_greedy" && !cfg.nonconvergent_demo)
        throw ParseError("config: family.kind 'eps_greedy' is a nonconvergent demo; set "
                         "nonconvergent_demo=true to enable it");
    if (cfg.family_kind != "eps_soft_softmax" && cfg.family_kind != "constant" &&
        cfg.family_kind != "eps_greedy")
        throw ParseError("config: unknown family.kind '" + cfg.family_kind + "'");

    if (doc.contains("schedule")) {
        const auto& s = doc["schedule"];
        reject_unknown(s, {"alpha0", "t0"}, "schedule");
        if (s.contains("alpha0")) cfg.schedule.alpha0 = s["alpha0"].get<double>();
        if (s.contains("t0")) cfg.schedule.t0 = s["t0"].get<double>();
        if (!(cfg.schedule.alpha0 > 0.0) || !(cfg.schedule.t0 > 0.0))
            throw ParseError("config: schedule parameters must be positive");
    }

    if (doc.contains("episodes")) cfg.episodes = doc["episodes"].get<long>();
    if (cfg.episodes < 1) throw ParseError("config: episodes must be >= 1");
    if (doc.contains("seeds")) {
        if (!doc["seeds"].is_array()) throw ParseError("config: 'seeds' must be an array");
        for (const auto& s : doc["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
    }
    if (cfg.seeds.empty()) throw ParseError("config: 'seeds' must be non-empty");
    if (doc.contains("report_cadence")) cfg.report_cadence = doc["report_cadence"].get<long>();
    if (doc.contains("output_dir")) cfg.output_dir = base_dir / doc["output_dir"].get<std::string>();

    if (doc.contains("mode")) {
        const std::string m = doc["mode"].get<std::string>();
        if (m == "train") cfg.mode = RunMode::train;
        else if (m == "certify") cfg.mode = RunMode::certify;
        else if (m == "oracle") cfg.mode = RunMode::oracle;
        else if (m == "all") cfg.mode = RunMode::all;
        else throw ParseError("config: mode must be train|certify|oracle|all");
    }

    if (doc.contains("certify")) {
        const auto& c = doc["certify"];
        reject_unknown(c,
                       {"epsilon", "sample_count", "pair_count", "theta_samples",
                        "episodes_per_theta", "theta_radius", "seed", "nu", "directions", "radii",
                        "lipschitz_samples", "lipschitz_radius"},
                       "certify");
        if (c.contains("epsilon")) cfg.certify.epsilon = c["epsilon"].get<double>();
        else cfg.certify.epsilon = cfg.family_epsilon;
        if (c.contains("sample_count")) cfg.certify.sample_count = c["sample_count"].get<int>();
        if (c.contains("pair_count")) cfg.certify.pair_count = c["pair_count"].get<int>();
        if (c.contains("theta_samples")) cfg.certify.theta_samples = c["theta_samples"].get<int>();
        if (c.contains("episodes_per_theta"))
            cfg.certify.episodes_per_theta = c["episodes_per_theta"].get<long>();
        if (c.contains("theta_radius")) cfg.certify.theta_radius = c["theta_radius"].get<double>();
        if (c.contains("seed")) cfg.certify.seed = c["seed"].get<std::uint64_t>();
        if (c.contains("nu")) cfg.certify.stability.nu = c["nu"].get<double>();
        if (c.contains("directions")) cfg.certify.stability.directions = c["directions"].get<int>();
        if (c.contains("radii")) cfg.certify.stability.radii = c["radii"].get<int>();
        if (c.contains("lipschitz_samples"))
            cfg.certify.stability.lipschitz_samples = c["lipschitz_samples"].get<int>();
        if (c.contains("lipschitz_radius"))
            cfg.certify.stability.lipschitz_radius = c["lipschitz_radius"].get<double>();
    } else {
        cfg.certify.epsilon = cfg.family_epsilon;
    }
    return cfg;
}

namespace {

FeatureMatrix load_features(const ExperimentConfig& config, const MdpSpec& spec) {
    if (config.feature_kind == "tabular") return FeatureMatrix::tabular(spec.num_pairs());
    std::ifstream in(config.feature_path);
    if (!in) throw ParseError("cannot open feature file: " + config.feature_path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("feature file: ") + e.what());
    }
    reject_unknown(doc, {"rows", "cols", "data"}, "feature file");
    const int rows = doc.at("rows").get<int>();
    const int cols = doc.at("cols").get<int>();
    if (rows != spec.num_pairs())
        throw ParseError("feature file: rows must equal |S||A| = " +
                         std::to_string(spec.num_pairs()));
    Eigen::MatrixXd m(rows, cols);
    const auto& data = doc.at("data");
    if (!data.is_array() || static_cast<int>(data.size()) != rows)
        throw ParseError("feature file: data must have 'rows' rows");
    for (int i = 0; i < rows; ++i) {
        if (!data[static_cast<std::size_t>(i)].is_array() ||
            static_cast<int>(data[static_cast<std::size_t>(i)].size()) != cols)
            throw ParseError("feature file: data rows must have 'cols' entries");
        for (int j = 0; j < cols; ++j)
            m(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
    try {
        return FeatureMatrix(std::move(m));
    } catch (const std::invalid_argument& e) {
        throw AssumptionError(std::string("feature matrix: ") + e.what());
    }
}

PolicyFamily build_family(const ExperimentConfig& config, const MdpSpec& spec) {
    if (config.family_kind == "constant") {
        PolicyTable base = config.family_policy
                               ? PolicyTable(*config.family_policy, config.family_epsilon)
                               : PolicyTable::uniform(spec.num_transient(), spec.num_actions());
        return PolicyFamily::constant(std::move(base), config.family_epsilon);
    }
    if (config.family_kind == "eps_greedy") return PolicyFamily::eps_greedy_demo(config.family_epsilon);
    return PolicyFamily::softmax(config.family_epsilon, config.family_temperature);
}

ordered_json vector_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        arr.push_back(std::move(row));
    }
    return arr;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write output file: " + path.string());
    out << content;
}

std::string history_csv(const std::vector<HistoryRow>& history, int dim) {
    std::ostringstream out;
    out << "episode";
    for (int i = 0; i < dim; ++i) out << ",theta_" << i;
    out << ",dist_theta_ref,episode_length,episode_return,alpha\n";
    for (const auto& row : history) {
        out << row.episode;
        for (int i = 0; i < dim; ++i) out << "," << format_double(row.theta[i]);
        out << "," << format_double(row.dist_to_ref) << "," << row.episode_length << ","
            << format_double(row.episode_return) << "," << format_double(row.alpha) << "\n";
    }
    return out.str();
}

struct OracleArtifacts {
    ordered_json doc;
    bool pass = true;
};

OracleArtifacts run_oracle(const LoadedExperiment& exp, const ExperimentConfig& config) {
    OracleArtifacts artifacts;
    const PolicyTable uniform = PolicyTable::uniform(exp.spec.num_transient(), exp.spec.num_actions());
    const ChainAnalysis ca(exp.spec, uniform);
    const TdSystem sys = assemble(exp.spec, exp.phi, ca);

    ordered_json doc;
    doc["policy"] = "uniform";
    doc["eta"] = vector_json(ca.eta_pi());
    doc["t"] = vector_json(ca.t_vec());
    doc["var_t"] = vector_json(ca.var_vec());
    doc["expected_T"] = ca.lambda_pi().dot(ca.t_vec());
    doc["expected_T_squared"] = absorption_second_moment(ca);
    doc["theta_pi"] = vector_json(sys.theta_pi);
    doc["a_pi"] = matrix_json(sys.a_pi);
    doc["b_pi"] = vector_json(sys.b_pi);
    doc["q_exact"] = vector_json(exact_q(exp.spec, ca));

    CoupledFixedPointConfig fp;
    fp.seed = config.certify.seed;
    const auto fixed_point = solve_coupled_fixed_point(exp.family, exp.spec, exp.phi, fp);
    doc["coupled_fixed_point"] =
        ordered_json{{"theta_star", vector_json(fixed_point.theta)},
                     {"residual", fixed_point.residual},
                     {"iterations", fixed_point.iterations},
                     {"converged", fixed_point.converged},
                     {"multi_start_spread",
                      multi_start_spread(exp.family, exp.spec, exp.phi, 5, 5.0, config.certify.seed)}};
    artifacts.pass = fixed_point.converged;
    artifacts.doc = std::move(doc);
    return artifacts;
}

} // namespace

LoadedExperiment load_experiment(const ExperimentConfig& config) {
    MdpSpec spec = load_mdp_file(config.mdp_path);
    const ValidationReport report = validate(spec);
    if (!report.empty()) {
        std::string msg = "mdp validation failed:";
        for (const auto& v : report) msg += "\n  " + v.location + ": " + v.message;
        throw AssumptionError(msg);
    }
    FeatureMatrix phi = load_features(config, spec);
    PolicyFamily family = build_family(config, spec);
    return {std::move(spec), std::move(phi), std::move(family)};
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
    const LoadedExperiment exp = load_experiment(config);
    std::filesystem::create_directories(config.output_dir);
    bool all_pass = true;

    const bool do_train = config.mode == RunMode::train || config.mode == RunMode::all;
    const bool do_certify = config.mode == RunMode::certify || config.mode == RunMode::all;
    const bool do_oracle = config.mode == RunMode::oracle || config.mode == RunMode::all;

    if (do_oracle) {
        const OracleArtifacts oracle = run_oracle(exp, config);
        write_file(config.output_dir / "oracle.json", oracle.doc.dump(2) + "\n");
        all_pass = all_pass && oracle.pass;
        log << "oracle: wrote oracle.json\n";
    }

    if (do_train) {
        CoupledFixedPointConfig fp;
        fp.seed = config.certify.seed;
        const auto fixed_point = solve_coupled_fixed_point(exp.family, exp.spec, exp.phi, fp);
        const std::optional<Eigen::VectorXd> theta_ref =
            fixed_point.converged ? std::optional<Eigen::VectorXd>(fixed_point.theta) : std::nullopt;

        struct SeedOutcome {
            TrainResult result;
        };
        std::vector<std::future<SeedOutcome>> jobs;
        for (const std::uint64_t seed : config.seeds)
            jobs.push_back(std::async(std::launch::async, [&, seed] {
                TrainOptions options;
                options.episodes = config.episodes;
                options.seed = seed;
                options.report_cadence = config.report_cadence;
                options.theta_ref = theta_ref;
                return SeedOutcome{
                    train(exp.spec, exp.phi, exp.family, config.schedule, options)};
            }));

        ordered_json per_seed = ordered_json::array();
        std::vector<double> distances;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            const SeedOutcome outcome = jobs[k].get(); // merged in config order
            const std::uint64_t seed = config.seeds[k];
            write_file(config.output_dir / ("history_seed" + std::to_string(seed) + ".csv"),
                       history_csv(outcome.result.history, exp.phi.dim()));
            ordered_json entry;
            entry["seed"] = seed;
            entry["theta_final"] = vector_json(outcome.result.theta);
            if (theta_ref) {
                const double dist = (outcome.result.theta - *theta_ref).norm();
                entry["dist_to_theta_star"] = dist;
                distances.push_back(dist);
            }
            per_seed.push_back(std::move(entry));
        }

        ordered_json summary;
        summary["episodes"] = config.episodes;
        summary["schedule"] = ordered_json{{"alpha0", config.schedule.alpha0},
                                           {"t0", config.schedule.t0}};
        if (theta_ref) {
            summary["theta_star"] = vector_json(*theta_ref);
            summary["theta_star_residual"] = fixed_point.residual;
            std::vector<double> sorted = distances;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t n = sorted.size();
            summary["median_dist_to_theta_star"] =
                n == 0 ? 0.0
                       : (n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]));
        } else {
            summary["theta_star_residual"] = fixed_point.residual;
            summary["note"] = "coupled fixed point did not converge; distances omitted";
            all_pass = false;
        }
        summary["seeds"] = std::move(per_seed);
        write_file(config.output_dir / "summary.json", summary.dump(2) + "\n");
        log << "train: wrote " << config.seeds.size() << " history files and summary.json\n";
    }

    if (do_certify) {
        const CertificationSuiteReport report =
            run_certification(exp.spec, exp.phi, exp.family, config.certify);
        write_file(config.output_dir / "certification.json", to_json(report) + "\n");
        log << to_text(report);
        all_pass = all_pass && report.pass;
    }

    return all_pass ? 0 : 1;
}

} // namespace episarsa
