#ifndef HYBRIDBF_EVALUATION_HPP
#define HYBRIDBF_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hybridbf/array_model.hpp"

// Far-field beampatterns, scalar pattern metrics and the transceiver-chain
// calibration simulation.

namespace hybridbf {

struct BeamPattern {
    AngularGrid grid;
    std::vector<double> gain_db;  // floored at -120 dB
};

// gain_db[i] = 20 log10 |row_i(A) x|
BeamPattern beampattern(const ArrayManifold& manifold, const Eigen::VectorXcd& weights);

struct PatternMetrics {
    double mainlobe_deg = 0.0;       // internal degrees
    double mainlobe_gain_db = 0.0;
    double sll_db = 0.0;             // peak minus highest sidelobe
    double beamwidth_3db_deg = 0.0;
    std::optional<double> grating_lobe_db;  // relative to peak, beyond +-60 deg
};

// search_halfwidth_deg bounds the peak hunt around the expected tilt.
PatternMetrics pattern_metrics(const BeamPattern& pattern, double expected_tilt_deg,
                               double search_halfwidth_deg = 5.0);

struct ChainImperfection {
    std::vector<double> amplitude_error_db;  // per non-reference chain
    std::vector<double> phase_offset_deg;
    double drift_deg_per_step = 0.0;
};

struct CalibrationReport {
    std::vector<double> estimated_offset_deg;
    std::vector<double> estimated_gain_db;
    double avg_phase_error_deg = 0.0;      // averaged over the sweep
    double avg_amplitude_error_db = 0.0;
};

// Emulates the reference-chain procedure: estimate per-chain offsets against
// the reference, correct digitally, then sweep commanded phase -180..180 and
// record residual input-vs-output errors including drift and noise.
CalibrationReport simulate_calibration(const ChainImperfection& imperfection, int n_sweep,
                                       double noise_floor_db, std::uint64_t seed = 42);

}  // namespace hybridbf

#endif
