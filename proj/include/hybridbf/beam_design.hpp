#ifndef HYBRIDBF_BEAM_DESIGN_HPP
#define HYBRIDBF_BEAM_DESIGN_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "hybridbf/array_model.hpp"
#include "hybridbf/barrier_solver.hpp"

// Shared constrained-synthesis step: given response rows of an effective
// manifold (A for the full reference, A*W for the DBF), minimize sidelobe
// power subject to a unit mainlobe, the half-power window and per-angle
// sidelobe ceilings, optionally with a per-weight power box.
//
// Magnitude lower bounds are handled by anchoring the phase at the current
// iterate (convex restriction); anchors are refreshed once after a solve.

namespace hybridbf {

struct PaBox {
    Eigen::VectorXd lo;  // per-entry |x_k|^2 lower bounds
    Eigen::VectorXd hi;
};

struct MaskedDesignInput {
    Eigen::MatrixXcd sll_rows;      // response rows to suppress
    double sll_ceiling = 0.0;       // epsilon, per-angle
    Eigen::RowVectorXcd main_row;   // response row at theta_d
    Eigen::MatrixXcd hp_rows;       // rows at the two half-power angles
    double hp_lo = 0.45;
    double hp_hi = 0.55;
    std::optional<PaBox> pa_box;
    // Optional tie-break: among near-optimal solutions (sidelobe power within
    // tracking_slack of the optimum), track |rows x - target| -- the
    // least-squares pull toward the mask that keeps solutions linear-phase.
    Eigen::MatrixXcd tracking_rows;
    Eigen::VectorXcd tracking_target;
    double tracking_slack = 0.01;
};

struct MaskedDesignResult {
    Eigen::VectorXcd x;
    bool feasible = false;
    int newton_iterations = 0;
    double sidelobe_power = 0.0;
    double max_scaled_violation = 0.0;
    std::string worst_constraint;
};

MaskedDesignResult design_masked_weights(const MaskedDesignInput& input,
                                         const BarrierOptions& options,
                                         const Eigen::VectorXcd* warm_start = nullptr);

}  // namespace hybridbf

#endif
