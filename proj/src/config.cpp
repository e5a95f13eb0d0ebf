#include "hybridbf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hybridbf {

namespace {

using nlohmann::json;

template <typename T>
T require(const json& j, const std::string& block, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(block + "." + key + ": missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(block + "." + key + ": wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const std::string& block, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(block + "." + key + ": wrong type");
    }
}

ElementPattern pattern_from(const std::string& s) {
    if (s == "isotropic") return ElementPattern::Isotropic;
    if (s == "macro65") return ElementPattern::Macro65;
    if (s == "small110") return ElementPattern::Small110;
    throw ConfigError("geometry.element_pattern: unknown pattern '" + s + "'");
}

}  // namespace

AngularGrid ScenarioConfig::make_grid() const {
    return AngularGrid::uniform(0.0, 180.0, grid_step_deg);
}

ArrayGeometry ScenarioConfig::make_geometry() const {
    return ArrayGeometry(n_elements, spacing_wavelengths, element_pattern);
}

TiltSet ScenarioConfig::internal_tilts() const {
    std::vector<double> internal;
    for (double t : tilts_deg) internal.push_back(tilt_to_internal_deg(t));
    std::sort(internal.begin(), internal.end());
    return TiltSet(internal);
}

std::vector<SpectralMask> ScenarioConfig::make_masks(const AngularGrid& grid) const {
    std::vector<SpectralMask> masks;
    const TiltSet tilts = internal_tilts();
    for (std::size_t d = 0; d < tilts.size(); ++d)
        masks.push_back(
            build_mask(tilts[d], halfpower_halfwidth_deg, sll_db, transition_deg, grid));
    return masks;
}

std::optional<InterconnectMask> ScenarioConfig::make_interconnect_mask() const {
    if (!mask_column_runs.has_value()) return std::nullopt;
    return InterconnectMask::from_column_runs(n_elements, *mask_column_runs);
}

ScenarioConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    const int version = require<int>(root, "config", "schema_version");
    if (version != 1) throw ConfigError("config.schema_version: unsupported version");

    ScenarioConfig cfg;
    {
        if (!root.contains("geometry")) throw ConfigError("geometry: missing block");
        const json& g = root.at("geometry");
        cfg.n_elements = require<int>(g, "geometry", "n_elements");
        if (cfg.n_elements < 2) throw ConfigError("geometry.n_elements: must be >= 2");
        cfg.spacing_wavelengths = require<double>(g, "geometry", "spacing_wavelengths");
        if (!(cfg.spacing_wavelengths > 0.0))
            throw ConfigError("geometry.spacing_wavelengths: must be positive");
        cfg.element_pattern = pattern_from(require<std::string>(g, "geometry", "element_pattern"));
    }
    if (root.contains("grid")) {
        cfg.grid_step_deg = optional_field(root.at("grid"), "grid", "step_deg", 0.1);
        if (!(cfg.grid_step_deg > 0.0 && cfg.grid_step_deg <= 5.0))
            throw ConfigError("grid.step_deg: must lie in (0, 5]");
    }
    {
        if (!root.contains("tilts")) throw ConfigError("tilts: missing block");
        const json& t = root.at("tilts");
        if (t.contains("list")) {
            cfg.tilts_deg = require<std::vector<double>>(t, "tilts", "list");
        } else {
            const double start = require<double>(t, "tilts", "start_deg");
            const double stop = require<double>(t, "tilts", "stop_deg");
            const double step = require<double>(t, "tilts", "step_deg");
            if (!(step > 0.0) || stop < start)
                throw ConfigError("tilts: need step_deg > 0 and stop_deg >= start_deg");
            for (double v = start; v <= stop + 1e-9; v += step) cfg.tilts_deg.push_back(v);
        }
        if (cfg.tilts_deg.empty()) throw ConfigError("tilts: empty tilt list");
        std::sort(cfg.tilts_deg.begin(), cfg.tilts_deg.end());
        for (std::size_t i = 1; i < cfg.tilts_deg.size(); ++i)
            if (!(cfg.tilts_deg[i] > cfg.tilts_deg[i - 1] + 1e-12))
                throw ConfigError("tilts: duplicate tilt values");
        for (double v : cfg.tilts_deg)
            if (std::abs(v) > 89.0) throw ConfigError("tilts: tilt outside (-89, 89) degrees");
    }
    {
        if (!root.contains("mask")) throw ConfigError("mask: missing block");
        const json& m = root.at("mask");
        cfg.halfpower_halfwidth_deg =
            require<double>(m, "mask", "halfpower_halfwidth_deg");
        cfg.sll_db = require<double>(m, "mask", "sll_db");
        cfg.transition_deg = require<double>(m, "mask", "transition_deg");
        if (!(cfg.sll_db > 0.0)) throw ConfigError("mask.sll_db: must be positive");
        if (!(cfg.halfpower_halfwidth_deg > 0.0))
            throw ConfigError("mask.halfpower_halfwidth_deg: must be positive");
        if (cfg.transition_deg < cfg.halfpower_halfwidth_deg)
            throw ConfigError("mask.transition_deg: must cover the half-power window");
    }
    {
        if (!root.contains("design")) throw ConfigError("design: missing block");
        const json& d = root.at("design");
        cfg.n_trx = require<int>(d, "design", "n_trx");
        if (cfg.n_trx < 1 || cfg.n_trx > cfg.n_elements)
            throw ConfigError("design.n_trx: must lie in [1, n_elements]");
        cfg.energy_threshold = optional_field(d, "design", "energy_threshold", 0.995);
        if (!(cfg.energy_threshold > 0.0 && cfg.energy_threshold < 1.0))
            throw ConfigError("design.energy_threshold: must lie in (0, 1)");
    }
    if (root.contains("solver")) {
        const json& s = root.at("solver");
        cfg.solver.max_iterations = optional_field(s, "solver", "max_iterations", 500);
        cfg.solver.tolerance = optional_field(s, "solver", "tolerance", 1e-6);
        cfg.solver.barrier_mu0 = optional_field(s, "solver", "barrier_mu0", 1.0);
        cfg.solver.barrier_shrink = optional_field(s, "solver", "barrier_shrink", 0.2);
        cfg.solver.max_newton = optional_field(s, "solver", "max_newton", 2000);
        cfg.solver.pa_box = optional_field(s, "solver", "pa_box", false);
        cfg.solver.pa_corridor_db = optional_field(s, "solver", "pa_corridor_db", 1.0);
        cfg.solver.random_seed =
            static_cast<std::uint64_t>(optional_field<long long>(s, "solver", "seed", 42));
        if (cfg.solver.max_iterations < 1) throw ConfigError("solver.max_iterations: must be >= 1");
        if (!(cfg.solver.tolerance > 0.0)) throw ConfigError("solver.tolerance: must be positive");
        if (!(cfg.solver.barrier_shrink > 0.0 && cfg.solver.barrier_shrink < 1.0))
            throw ConfigError("solver.barrier_shrink: must lie in (0, 1)");
    }
    if (root.contains("factorizer")) {
        const json& f = root.at("factorizer");
        const std::string kind = optional_field<std::string>(f, "factorizer", "kind", "wiener");
        if (kind == "wiener") cfg.factorizer_kind = FactorizerKind::Wiener;
        else if (kind == "givens") cfg.factorizer_kind = FactorizerKind::Givens;
        else throw ConfigError("factorizer.kind: must be 'wiener' or 'givens'");
        if (f.contains("mask_column_runs")) {
            std::vector<std::pair<int, int>> runs;
            try {
                for (const auto& item : f.at("mask_column_runs"))
                    runs.push_back({item.at(0).get<int>(), item.at(1).get<int>()});
            } catch (const json::exception&) {
                throw ConfigError("factorizer.mask_column_runs: expected [[first, length], ...]");
            }
            if (static_cast<int>(runs.size()) != cfg.n_trx)
                throw ConfigError("factorizer.mask_column_runs: one run per transceiver required");
            cfg.mask_column_runs = runs;
        }
        cfg.givens.phase_threshold_deg =
            optional_field(f, "factorizer", "givens_phase_threshold_deg", 30.0);
        cfg.givens.amplitude_threshold_db =
            optional_field(f, "factorizer", "givens_amplitude_threshold_db", 3.0);
        cfg.givens.max_rotations = optional_field(f, "factorizer", "max_rotations", 32);
        const std::string style =
            optional_field<std::string>(f, "factorizer", "combiner_style", "claim2");
        if (style == "claim2") cfg.combiner_style = CombinerStyle::Claim2RatRace;
        else if (style == "blass") cfg.combiner_style = CombinerStyle::BlassWilkinson;
        else throw ConfigError("factorizer.combiner_style: must be 'claim2' or 'blass'");
        if (!(cfg.givens.phase_threshold_deg > 0.0))
            throw ConfigError("factorizer.givens_phase_threshold_deg: must be positive");
    }
    if (root.contains("simulation")) {
        const json& s = root.at("simulation");
        cfg.per_component_loss_db =
            optional_field(s, "simulation", "per_component_loss_db", 0.0);
        cfg.normalize_excitation =
            optional_field(s, "simulation", "normalize_excitation", true);
        if (cfg.per_component_loss_db < 0.0)
            throw ConfigError("simulation.per_component_loss_db: must be >= 0");
    }
    if (root.contains("calibration")) {
        const json& c = root.at("calibration");
        cfg.calibration_chains = optional_field(c, "calibration", "n_chains", 5);
        cfg.calibration_max_offset_deg =
            optional_field(c, "calibration", "max_offset_deg", 40.0);
        cfg.calibration_max_gain_err_db =
            optional_field(c, "calibration", "max_gain_error_db", 1.0);
        cfg.calibration_noise_floor_db =
            optional_field(c, "calibration", "noise_floor_db", -60.0);
        cfg.calibration_sweep_points = optional_field(c, "calibration", "sweep_points", 361);
        cfg.calibration_drift_deg_per_step =
            optional_field(c, "calibration", "drift_deg_per_step", 0.0);
        if (cfg.calibration_chains < 1) throw ConfigError("calibration.n_chains: must be >= 1");
        if (cfg.calibration_sweep_points < 2)
            throw ConfigError("calibration.sweep_points: must be >= 2");
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace hybridbf
