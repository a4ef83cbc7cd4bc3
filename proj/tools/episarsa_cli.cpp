#include "episarsa/errors.hpp"
#include "episarsa/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw episarsa::ParseError("--seed-override: no seeds given");
    return seeds;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-horizon SARSA with linear function approximation: training, "
                 "exact oracles and convergence-condition certification"};

    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::string seed_override;
    app.add_option("--config", config_path, "Experiment config (JSON)")->required();
    app.add_option("--mode", mode, "Override mode: train|certify|oracle|all");
    app.add_option("--out", out_dir, "Override output directory");
    app.add_option("--seed-override", seed_override, "Comma-separated seed list");

    CLI11_PARSE(app, argc, argv);

    try {
        episarsa::ExperimentConfig config = episarsa::ExperimentConfig::load_file(config_path);
        if (!mode.empty()) {
            if (mode == "train") config.mode = episarsa::RunMode::train;
            else if (mode == "certify") config.mode = episarsa::RunMode::certify;
            else if (mode == "oracle") config.mode = episarsa::RunMode::oracle;
            else if (mode == "all") config.mode = episarsa::RunMode::all;
            else throw episarsa::ParseError("--mode must be train|certify|oracle|all");
        }
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (!seed_override.empty()) config.seeds = parse_seed_list(seed_override);
        return episarsa::run_experiment(config, std::cout);
    } catch (const episarsa::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const episarsa::AssumptionError& e) {
        std::cerr << "assumption violation: " << e.what() << "\n";
        return 3;
    } catch (const episarsa::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
