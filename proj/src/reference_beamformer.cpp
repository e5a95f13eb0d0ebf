#include "hybridbf/reference_beamformer.hpp"

#include <stdexcept>

#include "hybridbf/beam_design.hpp"

namespace hybridbf {

namespace {

Eigen::MatrixXcd rows_at(const ArrayManifold& manifold, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(idx.size()), manifold.n_elements());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            manifold.rows.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

void check_shared_grid(const ArrayManifold& manifold, const SpectralMask& mask) {
    if (mask.grid_size != manifold.n_angles())
        throw std::invalid_argument("manifold and mask must share a grid");
}

}  // namespace

FullAaaWeights ls_reference(const ArrayManifold& manifold, const SpectralMask& mask) {
    check_shared_grid(manifold, mask);
    const std::size_t n_rows = mask.mainlobe_region.size() + mask.sll_region.size();
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(n_rows), manifold.n_elements());
    Eigen::VectorXcd target(static_cast<Eigen::Index>(n_rows));
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < mask.mainlobe_region.size(); ++i, ++r) {
        A.row(r) = manifold.rows.row(static_cast<Eigen::Index>(mask.mainlobe_region[i]));
        target[r] = mask.mainlobe_target[i];
    }
    for (std::size_t idx : mask.sll_region) {
        A.row(r) = manifold.rows.row(static_cast<Eigen::Index>(idx));
        target[r++] = cplx(0.0, 0.0);
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    svd.setThreshold(1e-12);

    FullAaaWeights out;
    out.tilt_deg = mask.tilt_deg;
    out.weights = svd.solve(target);  // minimum-norm least squares
    const double smin = sv[sv.size() - 1];
    out.manifold_condition = (smin > smax * 1e-15) ? smax / smin : 1e300;
    if (svd.rank() < std::min<Eigen::Index>(A.rows(), A.cols()))
        out.note = "rank-deficient manifold; minimum-norm solution returned";
    return out;
}

FullAaaWeights constrained_reference(const ArrayManifold& manifold, const SpectralMask& mask) {
    check_shared_grid(manifold, mask);
    MaskedDesignInput in;
    in.sll_rows = rows_at(manifold, mask.sll_region);
    in.sll_ceiling = mask.sll_ceiling_linear;
    in.main_row = steering_vector(manifold.geometry, mask.tilt_deg).transpose();
    in.hp_rows.resize(2, manifold.n_elements());
    in.hp_rows.row(0) =
        steering_vector(manifold.geometry, mask.halfpower_angles_deg[0]).transpose();
    in.hp_rows.row(1) =
        steering_vector(manifold.geometry, mask.halfpower_angles_deg[1]).transpose();
    {
        const Eigen::MatrixXcd mainlobe_rows = rows_at(manifold, mask.mainlobe_region);
        in.tracking_rows.resize(mainlobe_rows.rows() + in.sll_rows.rows(),
                                manifold.n_elements());
        in.tracking_rows << mainlobe_rows, in.sll_rows;
        in.tracking_target = Eigen::VectorXcd::Zero(in.tracking_rows.rows());
        for (std::size_t i = 0; i < mask.mainlobe_region.size(); ++i)
            in.tracking_target[static_cast<Eigen::Index>(i)] = mask.mainlobe_target[i];
    }

    const FullAaaWeights warm = ls_reference(manifold, mask);
    BarrierOptions options;
    MaskedDesignResult res = design_masked_weights(in, options, &warm.weights);
    if (!res.feasible)
        throw std::runtime_error("constrained_reference: infeasible constraint set (worst: " +
                                 res.worst_constraint + ")");

    FullAaaWeights out;
    out.tilt_deg = mask.tilt_deg;
    out.weights = res.x;
    out.feasible = true;
    return out;
}

}  // namespace hybridbf
