#ifndef HYBRIDBF_RFBN_FACTORIZER_HPP
#define HYBRIDBF_RFBN_FACTORIZER_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hybridbf/joint_optimizer.hpp"
#include "hybridbf/microwave_network.hpp"
#include "hybridbf/rfbn_types.hpp"
#include "hybridbf/transceiver_bound.hpp"

// Turns RFBN matrices into implementable form: the masked multi-stage
// Wiener factorization (macro-cell), Givens-rotation sparsification toward
// generalized Butler behavior (small-cell), and the decomposition of W into
// a staged microwave component network.

namespace hybridbf {

// Greedy deflation loop: per column, mask the current dominant left
// singular vector, normalize, deflate by the orthogonal projection.
RfbnMatrix multistage_wiener_factorize(const TiltMatrix& theta_matrix,
                                       const InterconnectMask& mask);

struct GivensRotation {
    int row_i = 0;   // row whose entry was zeroed
    int row_k = 0;   // pivot row
    double c = 1.0;  // cosine (real)
    cplx s;          // sine (complex)
};

// Applies G to rows (i, k) of a matrix (left multiplication).
void apply_givens(Eigen::MatrixXcd& m, const GivensRotation& g);

struct GivensSettings {
    double phase_threshold_deg = 30.0;
    double amplitude_threshold_db = 3.0;
    int max_rotations = 32;
};

using DbfReoptimize = std::function<std::pair<DbfWeights, SolveReport>(
    const RfbnMatrix&, double tilt_deg)>;

struct GivensResult {
    RfbnMatrix rfbn;
    DbfBank dbf_bank;
    std::vector<GivensRotation> rotations;
};

// Zeroes combiner inputs whose pairwise mismatch across the bank exceeds the
// threshold, re-optimizing the DBF per tilt after every rotation; rolls back
// a rotation that pushes any tilt below its sidelobe mask.
GivensResult givens_sparsify(const RfbnMatrix& rfbn, const DbfBank& dbf_bank,
                             const GivensSettings& settings, const DbfReoptimize& reopt);

enum class CombinerStyle {
    BlassWilkinson,   // equal-split 3-port combiners, mismatch dissipated
    Claim2RatRace,    // ratio-matched rat-races with paired isolation routing
};

// Per-column splitter trees with exact power ratios, phase lines carrying
// arg(w), and per-antenna combiner trees in the requested style.
MicrowaveNetwork factorize_network(const RfbnMatrix& rfbn,
                                   CombinerStyle style = CombinerStyle::Claim2RatRace);

struct ClaimReport {
    std::vector<int> per_stage_combiner_count;
    int combiner_bound = 0;  // N_trx - 1
    bool claim1_ok = false;
    std::vector<double> per_tilt_linear_phase_dev_deg;  // max deviation from best-fit line
    std::vector<double> per_tilt_magnitude_asymmetry_db;
    std::vector<int> unpaired_couplers;
};

ClaimReport verify_claims(const MicrowaveNetwork& network, const DbfBank& dbf_bank);

}  // namespace hybridbf

#endif
