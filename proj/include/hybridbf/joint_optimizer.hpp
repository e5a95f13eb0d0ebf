#ifndef HYBRIDBF_JOINT_OPTIMIZER_HPP
#define HYBRIDBF_JOINT_OPTIMIZER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridbf/array_model.hpp"
#include "hybridbf/rfbn_types.hpp"

// Joint RFBN/DBF design over a tilt range (alternating minimization) and
// the per-tilt DBF design for a fixed RFBN, including the PA power corridor
// and transceiver-failure re-optimization.

namespace hybridbf {

struct DbfWeights {
    double tilt_deg = 0.0;  // internal degrees
    Eigen::VectorXcd weights;
    Eigen::VectorXd pa_reference_powers;  // per-PA corridor anchors (box runs only)

    // Weights expressed against the per-PA reference powers: entry k becomes
    // theta_k / sqrt(N * ref_k), so the PA corridor constraint reads
    // |normalized_k|^2 in [1/N, 10^(corridor_db/10)/N].
    Eigen::VectorXcd pa_normalized() const;
};

struct DbfBank {
    std::vector<DbfWeights> entries;

    Eigen::MatrixXcd matrix() const;  // Upsilon: N_trx x N_theta
    std::size_t size() const { return entries.size(); }
};

struct SolverSettings {
    int max_iterations = 500;      // outer alternation cap
    double tolerance = 1e-6;       // relative cost change
    double barrier_mu0 = 1.0;
    double barrier_shrink = 0.2;
    int max_newton = 2000;
    bool pa_box = false;
    double pa_corridor_db = 1.0;   // per-PA linear-mode power window
    // Per-PA corridor anchors; empty means "derive from a box-free solve of
    // the same problem" (the corridor then only caps the headroom).
    Eigen::VectorXd pa_reference_powers;
    std::uint64_t random_seed = 42;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double final_cost = 0.0;
    double sidelobe_power = 0.0;
    std::map<std::string, double> constraint_violations;  // per-kind max slack
    std::vector<std::size_t> infeasible_tilts;
    std::vector<double> iteration_costs;  // accepted outer-loop costs
    std::string condition_metadata;
};

// Per-tilt DBF for a fixed RFBN: minimize sidelobe power subject to unit
// mainlobe, half-power window, per-angle ceilings and the PA corridor.
// Infeasible masks yield the best-effort (max-SLL) solution, flagged.
std::pair<DbfWeights, SolveReport> optimize_dbf(const RfbnMatrix& rfbn,
                                                const ArrayManifold& manifold,
                                                const SpectralMask& mask,
                                                const SolverSettings& settings);

// Alternating joint design: SVD/mask initialization, per-tilt DBF solves,
// masked stacked least-squares RFBN updates with column renormalization.
std::tuple<RfbnMatrix, DbfBank, SolveReport> optimize_joint(
    const ArrayManifold& manifold, const TiltSet& tilts,
    const std::vector<SpectralMask>& masks, int n_trx,
    const std::optional<InterconnectMask>& mask_S, const SolverSettings& settings);

// DBF re-optimization with failed transceiver columns removed; the returned
// vector keeps the full length with zeros at failed indices.
std::pair<DbfWeights, SolveReport> reoptimize_on_failure(const RfbnMatrix& rfbn,
                                                         const std::set<int>& failed_tx,
                                                         const ArrayManifold& manifold,
                                                         const SpectralMask& mask,
                                                         const SolverSettings& settings);

}  // namespace hybridbf

#endif
