#ifndef HYBRIDBF_PIPELINE_HPP
#define HYBRIDBF_PIPELINE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hybridbf/config.hpp"
#include "hybridbf/evaluation.hpp"
#include "hybridbf/microwave_network.hpp"
#include "hybridbf/rfbn_factorizer.hpp"
#include "hybridbf/transceiver_bound.hpp"

// Batch pipeline behind the CLI subcommands.  Every stage is a plain
// function over the scenario config so tests can drive it in-process;
// artifacts are written as JSON/CSV/text files with deterministic content.

namespace hybridbf::pipeline {

struct DesignArtifacts {
    RfbnMatrix w;
    DbfBank bank;
    SolveReport report;
    SvdBound bound;
    std::vector<std::string> files;
};

DesignArtifacts run_design(const ScenarioConfig& config);
void write_design(const DesignArtifacts& artifacts, const std::string& out_dir,
                  std::vector<std::string>& files);
void load_design(const std::string& dir, RfbnMatrix& w, DbfBank& bank);

struct FactorizeArtifacts {
    RfbnMatrix w;  // post-sparsification when the Givens path runs
    DbfBank bank;
    MicrowaveNetwork network;        // configured combiner style
    MicrowaveNetwork blass_network;  // all-Wilkinson baseline
    ClaimReport claims;
    int applied_rotations = 0;
};

FactorizeArtifacts run_factorize(const ScenarioConfig& config, const RfbnMatrix& w,
                                 const DbfBank& bank);
void write_factorize(const FactorizeArtifacts& artifacts, const std::string& out_dir,
                     std::vector<std::string>& files);

struct SweepSpec {
    double start_deg = 0.0;  // user tilt degrees
    double stop_deg = 0.0;
    double step_deg = 1.0;
};

struct EvaluateRow {
    double tilt_deg = 0.0;  // user degrees
    double mainlobe_deg = 0.0;
    double gain_db = 0.0;
    double sll_db = 0.0;
    double bw3db_deg = 0.0;
    double insertion_loss_db = 0.0;
    double avg_mismatch_deg = 0.0;
};

struct EvaluateArtifacts {
    std::vector<EvaluateRow> rows;
};

EvaluateArtifacts run_evaluate(const ScenarioConfig& config, const RfbnMatrix& w,
                               const DbfBank& bank, const MicrowaveNetwork& network,
                               const std::optional<SweepSpec>& sweep,
                               const std::set<int>& fail_tx, const std::string& out_dir,
                               std::vector<std::string>& files);

CalibrationReport run_calibrate_sim(const ScenarioConfig& config, const std::string& out_dir,
                                    std::vector<std::string>& files);

void write_manifest(const std::string& out_dir, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& files,
                    const std::vector<std::pair<std::string, double>>& timings);

std::string format_g6(double v);

}  // namespace hybridbf::pipeline

#endif
