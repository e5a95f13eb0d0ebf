#ifndef HYBRIDBF_MICROWAVE_SIM_HPP
#define HYBRIDBF_MICROWAVE_SIM_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridbf/joint_optimizer.hpp"
#include "hybridbf/microwave_network.hpp"

// Single-frequency propagation through a MicrowaveNetwork with ideal
// component models, tracking per-combiner dissipation and the power ledger
// input = radiated + dissipated.

namespace hybridbf {

struct PortSignal {
    double amplitude = 0.0;  // non-negative, normalized volts
    double phase_rad = 0.0;  // wrapped to (-pi, pi]

    static PortSignal from_complex(cplx v);
    cplx to_complex() const { return std::polar(amplitude, phase_rad); }
};

struct CombinerDissipation {
    int combiner_id = 0;  // running index over combiner records
    double watts = 0.0;
    double input_power = 0.0;
    double sum_power = 0.0;
    double iso_power = 0.0;
    double input_phase_diff_rad = 0.0;  // between the two (active) inputs
    int stage_index = 0;
    bool feeds_antenna = false;
};

struct PropagationResult {
    std::vector<PortSignal> antenna_signals;
    std::vector<CombinerDissipation> per_combiner;
    double total_input_power = 0.0;
    double total_radiated_power = 0.0;
    double total_dissipated_power = 0.0;
};

enum class PropagationModel {
    Physical,    // spec component models, mismatch power dissipated/routed
    IdealAdder,  // combiners act as lossless mathematical adders (verification)
};

// per_component_loss_db: optional uniform attenuation per component, off by 0.
PropagationResult propagate(const MicrowaveNetwork& network,
                            const std::vector<PortSignal>& excitation,
                            PropagationModel model = PropagationModel::Physical,
                            double per_component_loss_db = 0.0);

PropagationResult propagate(const MicrowaveNetwork& network, const Eigen::VectorXcd& excitation,
                            PropagationModel model = PropagationModel::Physical,
                            double per_component_loss_db = 0.0);

Eigen::VectorXcd antenna_vector(const PropagationResult& result);

// 10 log10(input / radiated); +inf (with flag semantics) at zero radiated power.
double insertion_loss_db(const PropagationResult& result);

struct MismatchProfile {
    std::vector<double> tilt_deg;           // internal degrees
    std::vector<double> avg_mismatch_deg;   // at the antenna-feeding combiner stage
    std::vector<double> insertion_loss_db;
};

MismatchProfile mismatch_profile(const MicrowaveNetwork& network, const DbfBank& dbf_bank,
                                 double per_component_loss_db = 0.0);

}  // namespace hybridbf

#endif
