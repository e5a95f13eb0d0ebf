#include "hybridbf/transceiver_bound.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hybridbf {

TiltMatrix stack_tilts(const std::vector<FullAaaWeights>& references) {
    if (references.empty()) throw std::invalid_argument("stack_tilts: no references");
    const Eigen::Index n_t = references.front().weights.size();
    std::vector<std::size_t> order(references.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return references[a].tilt_deg < references[b].tilt_deg;
    });

    TiltMatrix theta;
    theta.columns.resize(n_t, static_cast<Eigen::Index>(references.size()));
    for (std::size_t c = 0; c < order.size(); ++c) {
        const auto& ref = references[order[c]];
        if (ref.weights.size() != n_t)
            throw std::invalid_argument("stack_tilts: mismatched weight lengths");
        if (c > 0 && !(ref.tilt_deg > theta.tilts_deg.back()))
            throw std::invalid_argument("stack_tilts: duplicate tilt");
        theta.columns.col(static_cast<Eigen::Index>(c)) = ref.weights;
        theta.tilts_deg.push_back(ref.tilt_deg);
    }
    return theta;
}

SvdBound min_transceivers(const TiltMatrix& theta_matrix, double energy_threshold) {
    if (!(energy_threshold > 0.0 && energy_threshold < 1.0))
        throw std::invalid_argument("min_transceivers: threshold must lie in (0, 1)");
    const Eigen::Index n_t = theta_matrix.columns.rows();
    const Eigen::Index n_theta = theta_matrix.columns.cols();
    if (theta_matrix.columns.norm() == 0.0)
        throw std::invalid_argument("min_transceivers: zero tilt matrix");

    // More tilts than antennas: keep n_t extreme tilts (ends plus evenly
    // spaced interior picks).
    Eigen::MatrixXcd theta = theta_matrix.columns;
    if (n_theta > n_t) {
        Eigen::MatrixXcd thin(n_t, n_t);
        for (Eigen::Index k = 0; k < n_t; ++k) {
            const auto idx = static_cast<Eigen::Index>(std::llround(
                static_cast<double>(k) * static_cast<double>(n_theta - 1) /
                static_cast<double>(n_t - 1)));
            thin.col(k) = theta.col(idx);
        }
        theta = std::move(thin);
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(theta, Eigen::ComputeThinU);
    SvdBound bound;
    bound.singular_values = svd.singularValues();
    bound.left_vectors = svd.matrixU();
    bound.energy_threshold = energy_threshold;

    const double total = bound.singular_values.squaredNorm();
    double acc = 0.0;
    bound.n_trx_min = static_cast<int>(bound.singular_values.size());
    for (Eigen::Index k = 0; k < bound.singular_values.size(); ++k) {
        acc += bound.singular_values[k] * bound.singular_values[k];
        if (acc >= energy_threshold * total) {
            bound.n_trx_min = static_cast<int>(k) + 1;
            break;
        }
    }
    return bound;
}

RfbnMatrix dominant_basis(const SvdBound& bound, int n_trx) {
    if (n_trx < 1 || n_trx > bound.left_vectors.cols())
        throw std::invalid_argument("dominant_basis: n_trx exceeds available singular vectors");
    RfbnMatrix w;
    w.entries = bound.left_vectors.leftCols(n_trx);
    return w;
}

}  // namespace hybridbf
