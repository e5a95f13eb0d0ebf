#ifndef HYBRIDBF_ARRAY_MODEL_HPP
#define HYBRIDBF_ARRAY_MODEL_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

// Array geometry, steering vectors, angular grids and spectral masks.
// Angles are "internal" degrees: the steering phase term uses cos(theta),
// so boresight sits at 90 deg. User-facing beamtilts (relative to
// boresight) map through tilt_to_internal_deg()/internal_to_tilt_deg().

namespace hybridbf {

using cplx = std::complex<double>;

enum class ElementPattern {
    Isotropic,
    Macro65,   // 3GPP-style pattern, 65 deg 3-dB beamwidth
    Small110,  // 3GPP-style pattern, 110 deg 3-dB beamwidth
};

struct ArrayGeometry {
    int n_elements = 0;                 // N_t
    double spacing_wavelengths = 0.0;   // delta / lambda
    ElementPattern element_pattern = ElementPattern::Isotropic;

    ArrayGeometry(int n, double spacing, ElementPattern pat);
};

// Strictly increasing list of angles in internal degrees within [-180, 180].
class AngularGrid {
public:
    explicit AngularGrid(std::vector<double> angles_deg);

    // Uniform grid from lo to hi inclusive (step adjusted to land on hi).
    static AngularGrid uniform(double lo_deg, double hi_deg, double step_deg);

    const std::vector<double>& angles_deg() const { return angles_; }
    std::size_t size() const { return angles_.size(); }
    double operator[](std::size_t i) const { return angles_[i]; }

    // Index of the grid point closest to angle_deg.
    std::size_t nearest_index(double angle_deg) const;

private:
    std::vector<double> angles_;
};

double tilt_to_internal_deg(double tilt_deg);
double internal_to_tilt_deg(double internal_deg);

// Linear field gain of one element; Macro65/Small110 follow the parabolic
// in-dB 3GPP shape -min(12 (theta'/theta_3dB)^2, A_m) with A_m = 30 dB.
double element_gain(ElementPattern pattern, double theta_deg);

// a(theta): entry k = g(theta) exp(j 2 pi (delta/lambda) k cos(theta)).
Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double theta_deg);

// A(theta): one transposed steering vector per grid angle, N_theta x N_t.
struct ArrayManifold {
    ArrayGeometry geometry;
    AngularGrid grid;
    Eigen::MatrixXcd rows;  // N_theta x N_t

    const Eigen::MatrixXcd& matrix() const { return rows; }
    std::size_t n_angles() const { return static_cast<std::size_t>(rows.rows()); }
    int n_elements() const { return geometry.n_elements; }
};

ArrayManifold array_manifold(const ArrayGeometry& geometry, const AngularGrid& grid);

// Per-tilt spectral mask: mainlobe window, transition (don't-care) band and
// sidelobe region with a linear power ceiling epsilon = 10^(-sll_db/10).
struct SpectralMask {
    double tilt_deg = 0.0;  // internal degrees
    double halfpower_angles_deg[2] = {0.0, 0.0};
    double sll_ceiling_linear = 0.0;           // epsilon
    double sll_db = 0.0;
    std::vector<std::size_t> mainlobe_region;  // target magnitude 1.0
    std::vector<std::size_t> sll_region;
    std::vector<std::size_t> dontcare_region;
    std::vector<double> mainlobe_target;       // parallel to mainlobe_region

    std::size_t grid_size = 0;  // partition sanity
};

SpectralMask build_mask(double tilt_deg, double halfpower_halfwidth_deg,
                        double sll_db, double transition_deg,
                        const AngularGrid& grid);

// Design tilt range R_theta, internal degrees, sorted ascending.
struct TiltSet {
    std::vector<double> tilts_deg;

    explicit TiltSet(std::vector<double> tilts);
    std::size_t size() const { return tilts_deg.size(); }
    double operator[](std::size_t i) const { return tilts_deg[i]; }
};

}  // namespace hybridbf

#endif
