#ifndef HYBRIDBF_BARRIER_SOLVER_HPP
#define HYBRIDBF_BARRIER_SOLVER_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridbf/array_model.hpp"

// Interior-point core shared by the reference beamformer and the DBF design.
//
// Solves, over complex weights x:
//     minimize    x^H (R^H R) x                    (sidelobe power)
//     subject to  Re(h^H x) = 1,  Im(h^H x) = 0    (mainlobe anchor)
//                 |c_i^H x|^2 <= u_i               (power ceilings)
//                 Re(d_j^H x) >= l_j               (phase-anchored floors)
//
// The complex equality pair is eliminated exactly on the real embedding;
// the inequalities go through a log barrier with Newton inner iterations.
// A feasibility phase minimizes the scaled worst violation first, so an
// infeasible problem still yields the best-effort point plus a certificate.

namespace hybridbf {

struct QuadCeiling {
    Eigen::VectorXcd c;
    double ubound = 0.0;
    std::string label;
};

struct LinFloor {
    Eigen::VectorXcd d;
    double level = 0.0;
    std::string label;
};

struct BeamProblem {
    Eigen::MatrixXcd objective_rows;    // R: minimize |R x - target|^2
    Eigen::VectorXcd objective_target;  // empty means zero target
    Eigen::VectorXcd mainlobe;          // h
    std::vector<QuadCeiling> ceilings;
    std::vector<LinFloor> floors;
    // Optional aggregate power ball: |ball_rows x|^2 <= ball_bound.
    Eigen::MatrixXcd ball_rows;
    double ball_bound = -1.0;
};

struct BarrierOptions {
    double tolerance = 1e-6;   // target duality-gap scale
    int max_newton = 2000;     // total Newton-step budget
    double mu0 = 1.0;          // initial barrier weight
    double shrink = 0.2;       // barrier weight multiplier per stage
};

struct BarrierResult {
    Eigen::VectorXcd x;
    bool feasible = false;
    int newton_iterations = 0;
    double objective = 0.0;
    double max_scaled_violation = 0.0;  // max_i g_i / scale_i at the solution
    std::string worst_constraint;
};

BarrierResult solve_beam_problem(const BeamProblem& problem, const BarrierOptions& options,
                                 const Eigen::VectorXcd* warm_start = nullptr);

}  // namespace hybridbf

#endif
