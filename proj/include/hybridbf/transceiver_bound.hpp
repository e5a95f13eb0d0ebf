#ifndef HYBRIDBF_TRANSCEIVER_BOUND_HPP
#define HYBRIDBF_TRANSCEIVER_BOUND_HPP

#include <vector>

#include <Eigen/Dense>

#include "hybridbf/reference_beamformer.hpp"
#include "hybridbf/rfbn_types.hpp"

// Minimum-transceiver bound: stack per-tilt reference weights into the
// tilt matrix, take its SVD, and read the smallest rank retaining the
// requested energy fraction.  The dominant left singular vectors give the
// unmasked RFBN initialization.

namespace hybridbf {

struct TiltMatrix {
    Eigen::MatrixXcd columns;       // N_t x N_theta, column j = u(theta_j)
    std::vector<double> tilts_deg;  // ascending
};

TiltMatrix stack_tilts(const std::vector<FullAaaWeights>& references);

struct SvdBound {
    Eigen::VectorXd singular_values;  // descending
    Eigen::MatrixXcd left_vectors;    // thin U
    double energy_threshold = 0.0;
    int n_trx_min = 0;
};

// For more tilts than antennas the matrix is first thinned to n_elements
// extreme tilts (the two ends plus evenly spaced interior tilts).
SvdBound min_transceivers(const TiltMatrix& theta_matrix, double energy_threshold);

// First n_trx left singular vectors as a dense, unmasked RFBN matrix.
RfbnMatrix dominant_basis(const SvdBound& bound, int n_trx);

}  // namespace hybridbf

#endif
