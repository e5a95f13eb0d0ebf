#include "hybridbf/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybridbf {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kFrontToBackDb = 30.0;  // A_m
}  // namespace

ArrayGeometry::ArrayGeometry(int n, double spacing, ElementPattern pat)
    : n_elements(n), spacing_wavelengths(spacing), element_pattern(pat) {
    if (n_elements < 2) throw std::invalid_argument("ArrayGeometry: n_elements must be >= 2");
    if (!(spacing_wavelengths > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacing must be positive");
}

AngularGrid::AngularGrid(std::vector<double> angles_deg) : angles_(std::move(angles_deg)) {
    if (angles_.size() < 2) throw std::invalid_argument("AngularGrid: need at least 2 points");
    for (std::size_t i = 0; i < angles_.size(); ++i) {
        if (angles_[i] < -180.0 || angles_[i] > 180.0)
            throw std::invalid_argument("AngularGrid: angle outside [-180, 180]");
        if (i > 0 && !(angles_[i] > angles_[i - 1]))
            throw std::invalid_argument("AngularGrid: angles must be strictly increasing");
    }
}

AngularGrid AngularGrid::uniform(double lo_deg, double hi_deg, double step_deg) {
    if (!(step_deg > 0.0) || !(hi_deg > lo_deg))
        throw std::invalid_argument("AngularGrid::uniform: bad range or step");
    const auto n = static_cast<std::size_t>(std::llround((hi_deg - lo_deg) / step_deg)) + 1;
    std::vector<double> angles(n);
    for (std::size_t i = 0; i < n; ++i)
        angles[i] = lo_deg + (hi_deg - lo_deg) * static_cast<double>(i) / static_cast<double>(n - 1);
    return AngularGrid(std::move(angles));
}

std::size_t AngularGrid::nearest_index(double angle_deg) const {
    auto it = std::lower_bound(angles_.begin(), angles_.end(), angle_deg);
    if (it == angles_.end()) return angles_.size() - 1;
    if (it == angles_.begin()) return 0;
    auto prev = it - 1;
    return (angle_deg - *prev <= *it - angle_deg)
               ? static_cast<std::size_t>(prev - angles_.begin())
               : static_cast<std::size_t>(it - angles_.begin());
}

double tilt_to_internal_deg(double tilt_deg) { return 90.0 - tilt_deg; }
double internal_to_tilt_deg(double internal_deg) { return 90.0 - internal_deg; }

double element_gain(ElementPattern pattern, double theta_deg) {
    if (pattern == ElementPattern::Isotropic) return 1.0;
    const double theta_3db = (pattern == ElementPattern::Macro65) ? 65.0 : 110.0;
    // Off-boresight angle; boresight is 90 deg internal, wrapped to [0, 180].
    double off = std::abs(theta_deg - 90.0);
    if (off > 180.0) off = 360.0 - off;
    const double atten_db = std::min(12.0 * (off / theta_3db) * (off / theta_3db), kFrontToBackDb);
    return std::pow(10.0, -atten_db / 20.0);
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double theta_deg) {
    if (theta_deg < -180.0 || theta_deg > 180.0)
        throw std::domain_error("steering_vector: angle outside [-180, 180]");
    const double g = element_gain(geometry.element_pattern, theta_deg);
    const double phase_step =
        2.0 * std::numbers::pi * geometry.spacing_wavelengths * std::cos(theta_deg * kDegToRad);
    Eigen::VectorXcd a(geometry.n_elements);
    for (int k = 0; k < geometry.n_elements; ++k)
        a[k] = g * std::polar(1.0, phase_step * static_cast<double>(k));
    return a;
}

ArrayManifold array_manifold(const ArrayGeometry& geometry, const AngularGrid& grid) {
    Eigen::MatrixXcd rows(static_cast<Eigen::Index>(grid.size()), geometry.n_elements);
    for (std::size_t i = 0; i < grid.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = steering_vector(geometry, grid[i]).transpose();
    return ArrayManifold{geometry, grid, std::move(rows)};
}

SpectralMask build_mask(double tilt_deg, double halfpower_halfwidth_deg,
                        double sll_db, double transition_deg,
                        const AngularGrid& grid) {
    if (!(sll_db > 0.0)) throw std::invalid_argument("build_mask: sll_db must be positive");
    if (!(halfpower_halfwidth_deg > 0.0))
        throw std::invalid_argument("build_mask: halfpower halfwidth must be positive");
    if (transition_deg < halfpower_halfwidth_deg)
        throw std::invalid_argument("build_mask: transition must cover the mainlobe window");
    const double lo = grid[0];
    const double hi = grid[grid.size() - 1];
    // A grid entirely inside the mainlobe window is degenerate but valid;
    // otherwise the window must be fully representable on the grid.
    const bool window_covers_grid =
        tilt_deg - halfpower_halfwidth_deg <= lo && tilt_deg + halfpower_halfwidth_deg >= hi;
    if (!window_covers_grid &&
        (tilt_deg - halfpower_halfwidth_deg < lo || tilt_deg + halfpower_halfwidth_deg > hi))
        throw std::domain_error("build_mask: mainlobe window exceeds grid bounds");

    SpectralMask mask;
    mask.tilt_deg = tilt_deg;
    mask.halfpower_angles_deg[0] = tilt_deg - halfpower_halfwidth_deg;
    mask.halfpower_angles_deg[1] = tilt_deg + halfpower_halfwidth_deg;
    mask.sll_db = sll_db;
    mask.sll_ceiling_linear = std::pow(10.0, -sll_db / 10.0);
    mask.grid_size = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double off = std::abs(grid[i] - tilt_deg);
        if (off <= halfpower_halfwidth_deg) {
            mask.mainlobe_region.push_back(i);
            mask.mainlobe_target.push_back(1.0);
        } else if (off <= transition_deg) {
            mask.dontcare_region.push_back(i);
        } else {
            mask.sll_region.push_back(i);
        }
    }
    return mask;
}

TiltSet::TiltSet(std::vector<double> tilts) : tilts_deg(std::move(tilts)) {
    if (tilts_deg.empty()) throw std::invalid_argument("TiltSet: empty tilt list");
    if (!std::is_sorted(tilts_deg.begin(), tilts_deg.end()))
        throw std::invalid_argument("TiltSet: tilts must be sorted ascending");
}

}  // namespace hybridbf
