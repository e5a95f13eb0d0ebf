#ifndef HYBRIDBF_CONFIG_HPP
#define HYBRIDBF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridbf/array_model.hpp"
#include "hybridbf/joint_optimizer.hpp"
#include "hybridbf/rfbn_factorizer.hpp"

// Scenario configuration: versioned JSON, validated field by field before
// any computation.  Tilt angles in the file are user-facing degrees
// relative to boresight.

namespace hybridbf {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class FactorizerKind { Wiener, Givens };

struct ScenarioConfig {
    // geometry
    int n_elements = 0;
    double spacing_wavelengths = 0.0;
    ElementPattern element_pattern = ElementPattern::Isotropic;

    // grid
    double grid_step_deg = 0.1;

    // tilts (user degrees, ascending)
    std::vector<double> tilts_deg;

    // mask
    double halfpower_halfwidth_deg = 2.5;
    double sll_db = 18.0;
    double transition_deg = 7.0;

    // design
    int n_trx = 0;
    double energy_threshold = 0.995;

    // solver
    SolverSettings solver;

    // factorizer
    FactorizerKind factorizer_kind = FactorizerKind::Wiener;
    std::optional<std::vector<std::pair<int, int>>> mask_column_runs;
    GivensSettings givens;
    CombinerStyle combiner_style = CombinerStyle::Claim2RatRace;

    // simulation
    double per_component_loss_db = 0.0;
    bool normalize_excitation = true;

    // calibration
    int calibration_chains = 5;
    double calibration_max_offset_deg = 40.0;
    double calibration_max_gain_err_db = 1.0;
    double calibration_noise_floor_db = -60.0;
    int calibration_sweep_points = 361;
    double calibration_drift_deg_per_step = 0.0;

    // Derived helpers (internal-angle domain).
    AngularGrid make_grid() const;
    ArrayGeometry make_geometry() const;
    TiltSet internal_tilts() const;
    std::vector<SpectralMask> make_masks(const AngularGrid& grid) const;
    std::optional<InterconnectMask> make_interconnect_mask() const;
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

}  // namespace hybridbf

#endif
