#include "hybridbf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "hybridbf/microwave_sim.hpp"

namespace hybridbf::pipeline {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXcd complex_matrix_from_json(const json& rows) {
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    Eigen::MatrixXcd m(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i)
        for (Eigen::Index j = 0; j < n_cols; ++j) {
            const auto& entry = rows.at(i).at(j);
            m(i, j) = cplx(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    return m;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content,
                std::vector<std::string>& files) {
    fs::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    files.push_back(path);
}

json report_to_json(const SolveReport& report) {
    json j;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["final_cost"] = report.final_cost;
    j["sidelobe_power"] = report.sidelobe_power;
    j["constraint_violations"] = report.constraint_violations;
    j["infeasible_tilts"] = report.infeasible_tilts;
    j["condition_metadata"] = report.condition_metadata;
    return j;
}

}  // namespace

std::string format_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

DesignArtifacts run_design(const ScenarioConfig& config) {
    const ArrayGeometry geometry = config.make_geometry();
    const AngularGrid grid = config.make_grid();
    const ArrayManifold manifold = array_manifold(geometry, grid);
    const TiltSet tilts = config.internal_tilts();
    const std::vector<SpectralMask> masks = config.make_masks(grid);
    const std::optional<InterconnectMask> mask_s =
        (config.factorizer_kind == FactorizerKind::Wiener) ? config.make_interconnect_mask()
                                                           : std::nullopt;

    DesignArtifacts artifacts;
    auto [w, bank, report] =
        optimize_joint(manifold, tilts, masks, config.n_trx, mask_s, config.solver);
    artifacts.w = std::move(w);
    artifacts.bank = std::move(bank);
    artifacts.report = std::move(report);

    // The SVD bound is part of the design record.
    std::vector<FullAaaWeights> refs;
    for (std::size_t d = 0; d < tilts.size(); ++d) {
        try {
            refs.push_back(constrained_reference(manifold, masks[d]));
        } catch (const std::runtime_error&) {
            refs.push_back(ls_reference(manifold, masks[d]));
        }
    }
    artifacts.bound = min_transceivers(stack_tilts(refs), config.energy_threshold);
    return artifacts;
}

void write_design(const DesignArtifacts& artifacts, const std::string& out_dir,
                  std::vector<std::string>& files) {
    json w_json;
    w_json["n_antennas"] = artifacts.w.n_antennas();
    w_json["n_trx"] = artifacts.w.n_transceivers();
    w_json["entries"] = complex_matrix_to_json(artifacts.w.entries);
    if (artifacts.w.mask.has_value()) {
        json mask = json::array();
        const auto& s = artifacts.w.mask->support;
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < s.cols(); ++j) row.push_back(s(i, j));
            mask.push_back(std::move(row));
        }
        w_json["mask"] = std::move(mask);
    } else {
        w_json["mask"] = nullptr;
    }
    write_file(out_dir, "w.json", w_json.dump(2) + "\n", files);

    json bank_json;
    bank_json["internal_tilts_deg"] = json::array();
    bank_json["tilts_deg"] = json::array();
    bank_json["weights"] = json::array();
    for (const auto& dbf : artifacts.bank.entries) {
        bank_json["internal_tilts_deg"].push_back(dbf.tilt_deg);
        bank_json["tilts_deg"].push_back(internal_to_tilt_deg(dbf.tilt_deg));
        json wrow = json::array();
        for (Eigen::Index k = 0; k < dbf.weights.size(); ++k)
            wrow.push_back({dbf.weights[k].real(), dbf.weights[k].imag()});
        bank_json["weights"].push_back(std::move(wrow));
    }
    write_file(out_dir, "dbf_bank.json", bank_json.dump(2) + "\n", files);

    json report_json = report_to_json(artifacts.report);
    report_json["svd_singular_values"] = json::array();
    for (Eigen::Index k = 0; k < artifacts.bound.singular_values.size(); ++k)
        report_json["svd_singular_values"].push_back(artifacts.bound.singular_values[k]);
    report_json["n_trx_min"] = artifacts.bound.n_trx_min;
    report_json["energy_threshold"] = artifacts.bound.energy_threshold;
    write_file(out_dir, "design_report.json", report_json.dump(2) + "\n", files);
}

void load_design(const std::string& dir, RfbnMatrix& w, DbfBank& bank) {
    std::ifstream w_in(dir + "/w.json");
    if (!w_in) throw std::runtime_error("missing design artifact: " + dir + "/w.json");
    json w_json = json::parse(w_in);
    w.entries = complex_matrix_from_json(w_json.at("entries"));
    if (!w_json.at("mask").is_null()) {
        const auto& mask = w_json.at("mask");
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> s(
            static_cast<Eigen::Index>(mask.size()),
            static_cast<Eigen::Index>(mask.at(0).size()));
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = mask.at(i).at(j).get<bool>();
        w.mask = InterconnectMask(std::move(s));
    }

    std::ifstream b_in(dir + "/dbf_bank.json");
    if (!b_in) throw std::runtime_error("missing design artifact: " + dir + "/dbf_bank.json");
    json b_json = json::parse(b_in);
    bank.entries.clear();
    for (std::size_t d = 0; d < b_json.at("internal_tilts_deg").size(); ++d) {
        DbfWeights dbf;
        dbf.tilt_deg = b_json.at("internal_tilts_deg").at(d).get<double>();
        const auto& wrow = b_json.at("weights").at(d);
        dbf.weights.resize(static_cast<Eigen::Index>(wrow.size()));
        for (Eigen::Index k = 0; k < dbf.weights.size(); ++k)
            dbf.weights[k] = cplx(wrow.at(k).at(0).get<double>(), wrow.at(k).at(1).get<double>());
        bank.entries.push_back(std::move(dbf));
    }
}

FactorizeArtifacts run_factorize(const ScenarioConfig& config, const RfbnMatrix& w,
                                 const DbfBank& bank) {
    FactorizeArtifacts artifacts;
    artifacts.w = w;
    artifacts.bank = bank;

    if (config.factorizer_kind == FactorizerKind::Givens) {
        const ArrayGeometry geometry = config.make_geometry();
        const AngularGrid grid = config.make_grid();
        const ArrayManifold manifold = array_manifold(geometry, grid);
        const auto reopt = [&](const RfbnMatrix& rfbn, double tilt_deg) {
            const SpectralMask mask =
                build_mask(tilt_deg, config.halfpower_halfwidth_deg, config.sll_db,
                           config.transition_deg, grid);
            return optimize_dbf(rfbn, manifold, mask, config.solver);
        };
        GivensResult result = givens_sparsify(w, bank, config.givens, reopt);
        artifacts.w = std::move(result.rfbn);
        artifacts.bank = std::move(result.dbf_bank);
        artifacts.applied_rotations = static_cast<int>(result.rotations.size());
    }

    artifacts.network = factorize_network(artifacts.w, config.combiner_style);
    artifacts.blass_network = factorize_network(artifacts.w, CombinerStyle::BlassWilkinson);
    artifacts.claims = verify_claims(artifacts.network, artifacts.bank);
    return artifacts;
}

void write_factorize(const FactorizeArtifacts& artifacts, const std::string& out_dir,
                     std::vector<std::string>& files) {
    write_file(out_dir, "network.txt", serialize_network(artifacts.network), files);
    write_file(out_dir, "network_blass.txt", serialize_network(artifacts.blass_network), files);

    json claims;
    claims["per_stage_combiner_count"] = artifacts.claims.per_stage_combiner_count;
    claims["combiner_bound"] = artifacts.claims.combiner_bound;
    claims["claim1_ok"] = artifacts.claims.claim1_ok;
    claims["per_tilt_linear_phase_dev_deg"] = artifacts.claims.per_tilt_linear_phase_dev_deg;
    claims["per_tilt_magnitude_asymmetry_db"] = artifacts.claims.per_tilt_magnitude_asymmetry_db;
    claims["unpaired_couplers"] = artifacts.claims.unpaired_couplers;
    claims["applied_rotations"] = artifacts.applied_rotations;
    int n_s = 0;
    for (const auto& stage : artifacts.network.stages)
        if (stage.kind == StageKind::PhaseBank) n_s += static_cast<int>(stage.phases.size());
    claims["n_phase_lines"] = n_s;
    write_file(out_dir, "claim_report.json", claims.dump(2) + "\n", files);

    // The (possibly sparsified) design going into the network.
    json w_json;
    w_json["n_antennas"] = artifacts.w.n_antennas();
    w_json["n_trx"] = artifacts.w.n_transceivers();
    w_json["entries"] = complex_matrix_to_json(artifacts.w.entries);
    w_json["mask"] = nullptr;
    write_file(out_dir, "w_factorized.json", w_json.dump(2) + "\n", files);
}

EvaluateArtifacts run_evaluate(const ScenarioConfig& config, const RfbnMatrix& w,
                               const DbfBank& bank, const MicrowaveNetwork& network,
                               const std::optional<SweepSpec>& sweep,
                               const std::set<int>& fail_tx, const std::string& out_dir,
                               std::vector<std::string>& files) {
    const ArrayGeometry geometry = config.make_geometry();
    const AngularGrid grid = config.make_grid();
    const ArrayManifold manifold = array_manifold(geometry, grid);

    std::vector<double> user_tilts;
    if (sweep.has_value()) {
        for (double t = sweep->start_deg; t <= sweep->stop_deg + 1e-9; t += sweep->step_deg)
            user_tilts.push_back(t);
    } else {
        for (const auto& dbf : bank.entries) user_tilts.push_back(internal_to_tilt_deg(dbf.tilt_deg));
        std::sort(user_tilts.begin(), user_tilts.end());
    }

    EvaluateArtifacts artifacts;
    std::ostringstream summary;
    summary << "tilt_deg,mainlobe_deg,gain_db,sll_db,bw3db_deg,insertion_loss_db,"
               "avg_mismatch_deg\n";

    for (double user_tilt : user_tilts) {
        const double tilt_internal = tilt_to_internal_deg(user_tilt);
        const SpectralMask mask = build_mask(tilt_internal, config.halfpower_halfwidth_deg,
                                             config.sll_db, config.transition_deg, grid);
        DbfWeights dbf;
        SolveReport report;
        if (!fail_tx.empty()) {
            std::tie(dbf, report) =
                reoptimize_on_failure(w, fail_tx, manifold, mask, config.solver);
        } else {
            std::tie(dbf, report) = optimize_dbf(w, manifold, mask, config.solver);
        }

        const Eigen::VectorXcd antenna_weights = w.entries * dbf.weights;
        const BeamPattern pattern = beampattern(manifold, antenna_weights);
        const PatternMetrics metrics =
            pattern_metrics(pattern, tilt_internal, config.transition_deg);

        Eigen::VectorXcd excitation = dbf.weights;
        if (config.normalize_excitation && excitation.norm() > 0.0)
            excitation /= excitation.norm();
        const PropagationResult prop = propagate(network, excitation, PropagationModel::Physical,
                                                 config.per_component_loss_db);
        double mismatch_acc = 0.0;
        int mismatch_count = 0;
        for (const auto& rec : prop.per_combiner) {
            if (!rec.feeds_antenna || rec.input_power <= 0.0) continue;
            mismatch_acc += rec.input_phase_diff_rad * 180.0 / std::numbers::pi;
            ++mismatch_count;
        }

        EvaluateRow row;
        row.tilt_deg = user_tilt;
        row.mainlobe_deg = internal_to_tilt_deg(metrics.mainlobe_deg);
        row.gain_db = metrics.mainlobe_gain_db;
        row.sll_db = metrics.sll_db;
        row.bw3db_deg = metrics.beamwidth_3db_deg;
        row.insertion_loss_db = insertion_loss_db(prop);
        row.avg_mismatch_deg = mismatch_count > 0 ? mismatch_acc / mismatch_count : 0.0;
        artifacts.rows.push_back(row);

        // Per-tilt pattern file over the user-facing angle axis.
        std::ostringstream pattern_csv;
        pattern_csv << "theta_deg,gain_db\n";
        for (std::size_t i = pattern.grid.size(); i-- > 0;) {
            pattern_csv << format_g6(internal_to_tilt_deg(pattern.grid[i])) << ","
                        << format_g6(pattern.gain_db[i]) << "\n";
        }
        char name[64];
        std::snprintf(name, sizeof(name), "pattern_tilt_%+07.2f.csv", user_tilt);
        write_file(out_dir, name, pattern_csv.str(), files);

        summary << format_g6(row.tilt_deg) << "," << format_g6(row.mainlobe_deg) << ","
                << format_g6(row.gain_db) << "," << format_g6(row.sll_db) << ","
                << format_g6(row.bw3db_deg) << "," << format_g6(row.insertion_loss_db) << ","
                << format_g6(row.avg_mismatch_deg) << "\n";
    }
    write_file(out_dir, "summary.csv", summary.str(), files);
    return artifacts;
}

CalibrationReport run_calibrate_sim(const ScenarioConfig& config, const std::string& out_dir,
                                    std::vector<std::string>& files) {
    // Chain imperfections drawn once from the seeded generator.
    std::mt19937_64 rng(config.solver.random_seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ChainImperfection imp;
    for (int k = 0; k < config.calibration_chains; ++k) {
        imp.phase_offset_deg.push_back(uni(rng) * config.calibration_max_offset_deg);
        imp.amplitude_error_db.push_back(uni(rng) * config.calibration_max_gain_err_db);
    }
    imp.drift_deg_per_step = config.calibration_drift_deg_per_step;

    const CalibrationReport report =
        simulate_calibration(imp, config.calibration_sweep_points,
                             config.calibration_noise_floor_db, config.solver.random_seed + 1);

    std::ostringstream csv;
    csv << "chain,true_offset_deg,estimated_offset_deg,true_gain_db,estimated_gain_db\n";
    for (std::size_t k = 0; k < imp.phase_offset_deg.size(); ++k) {
        csv << k << "," << format_g6(imp.phase_offset_deg[k]) << ","
            << format_g6(report.estimated_offset_deg[k]) << ","
            << format_g6(imp.amplitude_error_db[k]) << ","
            << format_g6(report.estimated_gain_db[k]) << "\n";
    }
    csv << "avg_residuals," << format_g6(report.avg_phase_error_deg) << ",deg,"
        << format_g6(report.avg_amplitude_error_db) << ",dB\n";
    write_file(out_dir, "calibration.csv", csv.str(), files);
    return report;
}

void write_manifest(const std::string& out_dir, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& files,
                    const std::vector<std::pair<std::string, double>>& timings) {
    // FNV-1a over the config bytes; stable across runs and toolchains.
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : config_text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    json manifest;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    manifest["config_hash"] = hex;
    manifest["seed"] = seed;
    json tj = json::object();
    for (const auto& [name, seconds] : timings) tj[name] = seconds;
    manifest["stage_seconds"] = tj;
    manifest["files"] = files;
    std::vector<std::string> tmp;
    write_file(out_dir, "run_manifest.json", manifest.dump(2) + "\n", tmp);
}

}  // namespace hybridbf::pipeline
