#include "hybridbf/evaluation.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace hybridbf {

namespace {
constexpr double kFloorDb = -120.0;
constexpr double kDegToRad = std::numbers::pi / 180.0;
}  // namespace

BeamPattern beampattern(const ArrayManifold& manifold, const Eigen::VectorXcd& weights) {
    if (weights.size() != manifold.n_elements())
        throw std::invalid_argument("beampattern: weight length mismatch");
    const Eigen::VectorXcd response = manifold.rows * weights;
    BeamPattern p{manifold.grid, {}};
    p.gain_db.resize(manifold.n_angles());
    for (std::size_t i = 0; i < manifold.n_angles(); ++i) {
        const double mag = std::abs(response[static_cast<Eigen::Index>(i)]);
        p.gain_db[i] = std::max(20.0 * std::log10(std::max(mag, 1e-300)), kFloorDb);
    }
    return p;
}

PatternMetrics pattern_metrics(const BeamPattern& pattern, double expected_tilt_deg,
                               double search_halfwidth_deg) {
    const auto& g = pattern.gain_db;
    const auto& grid = pattern.grid;
    const std::size_t n = g.size();
    if (n < 3) throw std::invalid_argument("pattern_metrics: degenerate pattern");

    // Peak restricted to the expected neighborhood.
    std::size_t peak = n;
    double peak_db = kFloorDb;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(grid[i] - expected_tilt_deg) > search_halfwidth_deg) continue;
        if (g[i] > peak_db) { peak_db = g[i]; peak = i; }
    }
    if (peak == n || peak_db <= kFloorDb + 1.0)
        throw std::runtime_error("pattern_metrics: no peak near expected tilt");
    // Reject window-edge "peaks": a real mainlobe dominates its neighborhood.
    if ((peak > 0 && g[peak - 1] > peak_db) || (peak + 1 < n && g[peak + 1] > peak_db))
        throw std::runtime_error("pattern_metrics: no local maximum near expected tilt");

    PatternMetrics m;
    m.mainlobe_deg = grid[peak];
    m.mainlobe_gain_db = peak_db;

    // First nulls: nearest local minima flanking the peak.
    std::size_t left_null = 0;
    bool have_left = false;
    for (std::size_t i = peak; i-- > 1;) {
        if (g[i] <= g[i - 1] && g[i] <= g[i + 1]) { left_null = i; have_left = true; break; }
    }
    std::size_t right_null = n - 1;
    bool have_right = false;
    for (std::size_t i = peak + 1; i + 1 < n; ++i) {
        if (g[i] <= g[i - 1] && g[i] <= g[i + 1]) { right_null = i; have_right = true; break; }
    }
    if (!have_left && !have_right)
        throw std::runtime_error("pattern_metrics: single-lobe pattern, SLL undefined");

    double worst_side = kFloorDb;
    if (have_left)
        for (std::size_t i = 0; i <= left_null; ++i) worst_side = std::max(worst_side, g[i]);
    if (have_right)
        for (std::size_t i = right_null; i < n; ++i) worst_side = std::max(worst_side, g[i]);
    m.sll_db = peak_db - worst_side;

    // 3 dB crossings around the peak, linearly interpolated.
    const double level = peak_db - 3.0;
    double left_cross = grid[0];
    for (std::size_t i = peak; i-- > 0;) {
        if (g[i] < level) {
            const double f = (level - g[i]) / (g[i + 1] - g[i]);
            left_cross = grid[i] + f * (grid[i + 1] - grid[i]);
            break;
        }
    }
    double right_cross = grid[n - 1];
    for (std::size_t i = peak + 1; i < n; ++i) {
        if (g[i] < level) {
            const double f = (g[i - 1] - level) / (g[i - 1] - g[i]);
            right_cross = grid[i - 1] + f * (grid[i] - grid[i - 1]);
            break;
        }
    }
    m.beamwidth_3db_deg = right_cross - left_cross;

    // Grating lobes: strongest return beyond +-60 deg of the mainlobe.
    double grating = kFloorDb;
    bool has_grating = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(grid[i] - m.mainlobe_deg) > 60.0 && g[i] > kFloorDb + 1.0) {
            grating = std::max(grating, g[i]);
            has_grating = true;
        }
    }
    if (has_grating) m.grating_lobe_db = grating - peak_db;
    return m;
}

CalibrationReport simulate_calibration(const ChainImperfection& imperfection, int n_sweep,
                                       double noise_floor_db, std::uint64_t seed) {
    if (n_sweep < 2) throw std::invalid_argument("simulate_calibration: n_sweep must be >= 2");
    if (imperfection.amplitude_error_db.size() != imperfection.phase_offset_deg.size())
        throw std::invalid_argument("simulate_calibration: imperfection vectors differ");

    const std::size_t n_chains = imperfection.amplitude_error_db.size();
    const double noise_sigma =
        std::sqrt(std::pow(10.0, noise_floor_db / 10.0) / 2.0);  // per-quadrature
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto noisy = [&](cplx v) {
        return v + cplx(noise_sigma * normal(rng), noise_sigma * normal(rng));
    };

    CalibrationReport report;
    std::vector<cplx> chain_gain(n_chains), correction(n_chains);
    for (std::size_t k = 0; k < n_chains; ++k) {
        chain_gain[k] = std::polar(std::pow(10.0, imperfection.amplitude_error_db[k] / 20.0),
                                   imperfection.phase_offset_deg[k] * kDegToRad);
        // CW reference comparison: chain k against the ideal reference chain.
        const cplx measured = noisy(chain_gain[k]);
        report.estimated_offset_deg.push_back(std::arg(measured) / kDegToRad);
        report.estimated_gain_db.push_back(20.0 * std::log10(std::abs(measured)));
        correction[k] = cplx(1.0, 0.0) / measured;
    }

    // Post-correction sweep of commanded phases, drift accumulating per step.
    double phase_acc = 0.0, amp_acc = 0.0;
    std::size_t count = 0;
    for (int step = 0; step < n_sweep; ++step) {
        const double commanded =
            -180.0 + 360.0 * static_cast<double>(step) / static_cast<double>(n_sweep - 1);
        const double drift = imperfection.drift_deg_per_step * static_cast<double>(step);
        for (std::size_t k = 0; k < n_chains; ++k) {
            const cplx drifted = chain_gain[k] * std::polar(1.0, drift * kDegToRad);
            const cplx out = noisy(correction[k] * drifted * std::polar(1.0, commanded * kDegToRad));
            double err_deg = std::arg(out) / kDegToRad - commanded;
            while (err_deg > 180.0) err_deg -= 360.0;
            while (err_deg < -180.0) err_deg += 360.0;
            phase_acc += std::abs(err_deg);
            amp_acc += std::abs(20.0 * std::log10(std::abs(out)));
            ++count;
        }
    }
    report.avg_phase_error_deg = phase_acc / static_cast<double>(count);
    report.avg_amplitude_error_db = amp_acc / static_cast<double>(count);
    return report;
}

}  // namespace hybridbf
