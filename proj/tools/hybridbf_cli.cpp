#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hybridbf/pipeline.hpp"

// Batch front-end: design -> factorize -> evaluate pipeline plus the
// calibration simulation.  Exit codes: 0 success, 2 validation error,
// 3 computational failure (artifacts are still written where possible).

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitComputation = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hybridbf::ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::optional<hybridbf::pipeline::SweepSpec> parse_sweep(const std::string& spec) {
    if (spec.empty()) return std::nullopt;
    hybridbf::pipeline::SweepSpec sweep;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> sweep.start_deg >> c1 >> sweep.stop_deg >> c2 >> sweep.step_deg) || c1 != ':' ||
        c2 != ':' || !(sweep.step_deg > 0.0) || sweep.stop_deg < sweep.start_deg)
        throw hybridbf::ConfigError("--sweep: expected START:STOP:STEP with positive step");
    return sweep;
}

struct StageTimer {
    std::vector<std::pair<std::string, double>> timings;
    template <typename F>
    auto time(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto result = f();
        const auto t1 = std::chrono::steady_clock::now();
        timings.push_back({name, std::chrono::duration<double>(t1 - t0).count()});
        return result;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid RF/digital beamformer synthesis and simulation"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", in_dir, sweep_spec;
    std::vector<int> fail_tx;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* cmd, bool needs_in) {
        cmd->add_option("--config", config_path, "scenario configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed_override, "override the configured RNG seed");
        if (needs_in) cmd->add_option("--in", in_dir, "input artifact directory");
    };

    CLI::App* design = app.add_subcommand("design", "synthesize the RFBN and DBF bank");
    add_common(design, false);
    CLI::App* factorize =
        app.add_subcommand("factorize", "factor the RFBN into a microwave network");
    add_common(factorize, true);
    CLI::App* evaluate = app.add_subcommand("evaluate", "beampattern and loss evaluation");
    add_common(evaluate, true);
    evaluate->add_option("--sweep", sweep_spec, "tilt sweep START:STOP:STEP (user degrees)");
    evaluate->add_option("--fail-tx", fail_tx, "transceiver indices to disable");
    CLI::App* calibrate =
        app.add_subcommand("calibrate-sim", "simulate transceiver chain calibration");
    add_common(calibrate, false);

    CLI11_PARSE(app, argc, argv);

    using namespace hybridbf;
    using namespace hybridbf::pipeline;

    std::string config_text;
    ScenarioConfig config;
    try {
        config_text = slurp(config_path);
        config = parse_config(config_text);
        if (seed_override >= 0)
            config.solver.random_seed = static_cast<std::uint64_t>(seed_override);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    }

    StageTimer timer;
    std::vector<std::string> files;
    try {
        if (design->parsed()) {
            auto artifacts = timer.time("design", [&] { return run_design(config); });
            write_design(artifacts, out_dir, files);
            write_manifest(out_dir, config_text, config.solver.random_seed, files, timer.timings);
            if (!artifacts.report.infeasible_tilts.empty()) {
                std::cerr << "design: " << artifacts.report.infeasible_tilts.size()
                          << " infeasible tilt(s); artifacts written with flags\n";
                return kExitComputation;
            }
        } else if (factorize->parsed()) {
            if (in_dir.empty()) throw ConfigError("--in: design artifact directory required");
            RfbnMatrix w;
            DbfBank bank;
            load_design(in_dir, w, bank);
            auto artifacts =
                timer.time("factorize", [&] { return run_factorize(config, w, bank); });
            write_factorize(artifacts, out_dir, files);
            write_manifest(out_dir, config_text, config.solver.random_seed, files, timer.timings);
            if (!artifacts.claims.claim1_ok) {
                std::cerr << "factorize: combiner stage bound exceeded ([C5]); see claim report\n";
                return kExitComputation;
            }
        } else if (evaluate->parsed()) {
            if (in_dir.empty()) throw ConfigError("--in: artifact directory required");
            RfbnMatrix w;
            DbfBank bank;
            load_design(in_dir, w, bank);
            std::ifstream net_in(in_dir + "/network.txt");
            MicrowaveNetwork network;
            if (net_in) {
                std::ostringstream buf;
                buf << net_in.rdbuf();
                network = parse_network(buf.str());
            } else {
                network = factorize_network(w, config.combiner_style);
            }
            const auto sweep = parse_sweep(sweep_spec);
            std::set<int> failed(fail_tx.begin(), fail_tx.end());
            timer.time("evaluate", [&] {
                return run_evaluate(config, w, bank, network, sweep, failed, out_dir, files);
            });
            write_manifest(out_dir, config_text, config.solver.random_seed, files, timer.timings);
        } else if (calibrate->parsed()) {
            timer.time("calibrate", [&] { return run_calibrate_sim(config, out_dir, files); });
            write_manifest(out_dir, config_text, config.solver.random_seed, files, timer.timings);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
    return kExitOk;
}
