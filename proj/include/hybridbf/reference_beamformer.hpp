#ifndef HYBRIDBF_REFERENCE_BEAMFORMER_HPP
#define HYBRIDBF_REFERENCE_BEAMFORMER_HPP

#include <string>

#include <Eigen/Dense>

#include "hybridbf/array_model.hpp"

// Full-dimension reference beamformer u(theta_d), one transceiver per
// antenna.  Serves as the performance reference and as the column source
// for the tilt matrix consumed by the transceiver bound.

namespace hybridbf {

struct FullAaaWeights {
    double tilt_deg = 0.0;  // internal degrees
    Eigen::VectorXcd weights;
    double manifold_condition = 0.0;  // set by ls_reference
    bool feasible = true;             // set by constrained_reference
    std::string note;
};

// Minimum-norm least squares fit of the mask target (1 in the mainlobe,
// 0 over the sidelobe region, don't-care rows omitted).
FullAaaWeights ls_reference(const ArrayManifold& manifold, const SpectralMask& mask);

// Constrained design: minimize sidelobe power subject to unit mainlobe
// response (phase anchored), half-power window and per-angle sidelobe
// ceilings.  Same solver as the DBF step with W = identity.
FullAaaWeights constrained_reference(const ArrayManifold& manifold, const SpectralMask& mask);

}  // namespace hybridbf

#endif
