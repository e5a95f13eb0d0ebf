#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hybridbf/evaluation.hpp"
#include "hybridbf/joint_optimizer.hpp"
#include "hybridbf/reference_beamformer.hpp"
#include "hybridbf/transceiver_bound.hpp"

using namespace hybridbf;

namespace {

RfbnMatrix identity_rfbn(int n) {
    RfbnMatrix w;
    w.entries = Eigen::MatrixXcd::Identity(n, n);
    return w;
}

double mainlobe_cost(const Eigen::MatrixXcd& sll_rows, const Eigen::RowVectorXcd& main_row,
                     const Eigen::VectorXcd& x) {
    const cplx main = main_row * x;
    return (sll_rows * x).squaredNorm() / std::norm(main);
}

// Exhaustive search over a quantized per-entry phase/amplitude grid for a
// 2-transceiver DBF; candidates are renormalized to a unit mainlobe and
// filtered by the mask constraints the solver also enforces.
double brute_force_dbf_cost(const Eigen::MatrixXcd& w, const ArrayManifold& manifold,
                            const SpectralMask& mask) {
    Eigen::MatrixXcd sll_rows(static_cast<Eigen::Index>(mask.sll_region.size()), w.cols());
    for (std::size_t i = 0; i < mask.sll_region.size(); ++i)
        sll_rows.row(static_cast<Eigen::Index>(i)) =
            manifold.rows.row(static_cast<Eigen::Index>(mask.sll_region[i])) * w;
    const Eigen::RowVectorXcd main_row =
        steering_vector(manifold.geometry, mask.tilt_deg).transpose() * w;
    Eigen::MatrixXcd hp_rows(2, w.cols());
    hp_rows.row(0) =
        steering_vector(manifold.geometry, mask.halfpower_angles_deg[0]).transpose() * w;
    hp_rows.row(1) =
        steering_vector(manifold.geometry, mask.halfpower_angles_deg[1]).transpose() * w;

    const int n_phase = 16, n_amp = 4;
    double best = std::numeric_limits<double>::infinity();
    for (int p1 = 0; p1 < n_phase; ++p1)
        for (int a1 = 1; a1 <= n_amp; ++a1)
            for (int p2 = 0; p2 < n_phase; ++p2)
                for (int a2 = 1; a2 <= n_amp; ++a2) {
                    Eigen::VectorXcd v(2);
                    v[0] = std::polar(a1 / double(n_amp),
                                      2.0 * std::numbers::pi * p1 / n_phase);
                    v[1] = std::polar(a2 / double(n_amp),
                                      2.0 * std::numbers::pi * p2 / n_phase);
                    const cplx main = main_row * v;
                    if (std::abs(main) < 1e-9) continue;
                    v /= main;
                    bool ok = true;
                    for (Eigen::Index h = 0; h < 2 && ok; ++h) {
                        const double hp = std::norm(cplx(hp_rows.row(h) * v));
                        ok = hp >= 0.45 && hp <= 0.55;
                    }
                    if (!ok) continue;
                    const Eigen::VectorXd power = (sll_rows * v).cwiseAbs2();
                    if (power.size() > 0 && power.maxCoeff() > mask.sll_ceiling_linear)
                        continue;
                    best = std::min(best, (sll_rows * v).squaredNorm());
                }
    return best;
}

}  // namespace

TEST_CASE("optimize_dbf with identity RFBN matches the constrained reference") {
    ArrayGeometry geo(11, 0.8, ElementPattern::Macro65);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.5);
    const auto manifold = array_manifold(geo, grid);
    const auto mask = build_mask(tilt_to_internal_deg(5.0), 3.5, 20.0, 8.0, grid);

    const auto ref = constrained_reference(manifold, mask);
    SolverSettings settings;
    auto [dbf, report] = optimize_dbf(identity_rfbn(11), manifold, mask, settings);
    REQUIRE(report.converged);

    Eigen::MatrixXcd sll_rows(static_cast<Eigen::Index>(mask.sll_region.size()), 11);
    for (std::size_t i = 0; i < mask.sll_region.size(); ++i)
        sll_rows.row(static_cast<Eigen::Index>(i)) =
            manifold.rows.row(static_cast<Eigen::Index>(mask.sll_region[i]));
    const Eigen::RowVectorXcd main_row = steering_vector(geo, mask.tilt_deg).transpose();
    const double c_ref = mainlobe_cost(sll_rows, main_row, ref.weights);
    const double c_dbf = mainlobe_cost(sll_rows, main_row, dbf.weights);
    CHECK(std::abs(c_ref - c_dbf) <= 1e-4 * std::max(1.0, c_ref));
}

TEST_CASE("optimize_dbf canonical solution has a real positive mainlobe response") {
    ArrayGeometry geo(8, 0.5, ElementPattern::Isotropic);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.5);
    const auto manifold = array_manifold(geo, grid);
    const auto mask = build_mask(tilt_to_internal_deg(0.0), 7.5, 15.0, 14.0, grid);
    SolverSettings settings;
    auto [dbf, report] = optimize_dbf(identity_rfbn(8), manifold, mask, settings);
    REQUIRE(report.converged);
    const cplx main = steering_vector(geo, mask.tilt_deg).transpose() * dbf.weights;
    CHECK(std::abs(main - cplx(1.0, 0.0)) < 1e-6);

    // Global phase changes nothing measurable.
    const Eigen::VectorXcd rotated = dbf.weights * std::polar(1.0, 0.7);
    const Eigen::VectorXd p1 = (manifold.rows * dbf.weights).cwiseAbs2();
    const Eigen::VectorXd p2 = (manifold.rows * rotated).cwiseAbs2();
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("PA corridor keeps normalized powers inside the 1 dB box") {
    ArrayGeometry geo(11, 0.8, ElementPattern::Macro65);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.5);
    const auto manifold = array_manifold(geo, grid);

    const auto mask_s =
        InterconnectMask::from_column_runs(11, {{0, 3}, {2, 3}, {4, 3}, {6, 3}, {8, 3}});
    std::vector<double> tilts;
    for (double t : {12.0, 9.0, 6.0, 3.0, 0.0}) tilts.push_back(tilt_to_internal_deg(t));
    std::sort(tilts.begin(), tilts.end());
    std::vector<SpectralMask> masks;
    for (double t : tilts) masks.push_back(build_mask(t, 4.0, 14.0, 9.0, grid));

    SolverSettings settings;
    settings.pa_box = true;
    settings.pa_corridor_db = 1.0;
    auto [w, bank, report] = optimize_joint(manifold, TiltSet(tilts), masks, 5, mask_s, settings);
    REQUIRE(report.infeasible_tilts.empty());

    const double lo = 1.0 / 5.0;
    const double hi = std::pow(10.0, 0.1) / 5.0;
    for (const auto& dbf : bank.entries) {
        const Eigen::VectorXcd norm = dbf.pa_normalized();
        for (int k = 0; k < 5; ++k) {
            CHECK(std::norm(norm[k]) >= lo - 1e-9);
            CHECK(std::norm(norm[k]) <= hi + 1e-9);
        }
    }
}

TEST_CASE("joint design with square RFBN reduces to the constrained reference") {
    ArrayGeometry geo(6, 0.5, ElementPattern::Isotropic);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.5);
    const auto manifold = array_manifold(geo, grid);
    const double tilt = tilt_to_internal_deg(0.0);
    const auto mask = build_mask(tilt, 10.0, 12.0, 18.0, grid);

    SolverSettings settings;
    auto [w, bank, report] = optimize_joint(manifold, TiltSet({tilt}), {mask}, 6, std::nullopt,
                                            settings);
    REQUIRE(bank.size() == 1);
    const auto ref = constrained_reference(manifold, mask);

    Eigen::MatrixXcd sll_rows(static_cast<Eigen::Index>(mask.sll_region.size()), 6);
    for (std::size_t i = 0; i < mask.sll_region.size(); ++i)
        sll_rows.row(static_cast<Eigen::Index>(i)) =
            manifold.rows.row(static_cast<Eigen::Index>(mask.sll_region[i]));
    const Eigen::RowVectorXcd main_row = steering_vector(geo, tilt).transpose();
    const double c_ref = mainlobe_cost(sll_rows, main_row, ref.weights);
    const double c_joint =
        mainlobe_cost(sll_rows, main_row, (w.entries * bank.entries[0].weights).eval());
    CHECK(std::abs(c_ref - c_joint) <= 1e-4 * std::max(1.0, c_ref));
}

TEST_CASE("joint 11x4 macro design meets the tilt-5 mask") {
    ArrayGeometry geo(11, 0.8, ElementPattern::Macro65);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.25);
    const auto manifold = array_manifold(geo, grid);
    const double tilt = tilt_to_internal_deg(5.0);
    const auto mask = build_mask(tilt, 3.5, 20.0, 8.0, grid);

    SolverSettings settings;
    settings.pa_box = true;
    auto [w, bank, report] =
        optimize_joint(manifold, TiltSet({tilt}), {mask}, 4, std::nullopt, settings);
    REQUIRE(report.infeasible_tilts.empty());

    const auto pattern = beampattern(manifold, (w.entries * bank.entries[0].weights).eval());
    const auto metrics = pattern_metrics(pattern, tilt, 8.0);
    CHECK(metrics.sll_db >= 20.0);
    CHECK(metrics.beamwidth_3db_deg / 2.0 <= 5.0);

    // Accepted outer-loop costs never increase.
    for (std::size_t i = 1; i < report.iteration_costs.size(); ++i)
        CHECK(report.iteration_costs[i] <= report.iteration_costs[i - 1] + 1e-12);
}

TEST_CASE("solver is within 5 percent of the exhaustive quantized optimum") {
    // Small instances with a coarse mask so the quantized grid contains
    // feasible points.
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> tilt_dist(-10.0, 10.0);
    int tested = 0;
    for (int inst = 0; tested < 3 && inst < 8; ++inst) {
        ArrayGeometry geo(4, 0.5, ElementPattern::Isotropic);
        const auto grid = AngularGrid::uniform(0.0, 180.0, 1.0);
        const auto manifold = array_manifold(geo, grid);
        const double tilt = tilt_to_internal_deg(tilt_dist(rng));
        const auto mask = build_mask(tilt, 16.0, 6.0, 30.0, grid);

        std::vector<FullAaaWeights> refs;
        for (double off : {-8.0, 8.0}) {
            FullAaaWeights r;
            r.tilt_deg = tilt + off;
            r.weights = steering_vector(geo, tilt + off).conjugate();
            r.weights /= r.weights.norm();
            refs.push_back(std::move(r));
        }
        RfbnMatrix w = dominant_basis(min_transceivers(stack_tilts(refs), 0.9), 2);

        const double oracle = brute_force_dbf_cost(w.entries, manifold, mask);
        if (!std::isfinite(oracle)) continue;  // no feasible grid point
        SolverSettings settings;
        auto [dbf, report] = optimize_dbf(w, manifold, mask, settings);
        REQUIRE(report.converged);
        CHECK(report.sidelobe_power <= 1.05 * oracle);
        ++tested;
    }
    CHECK(tested >= 1);
}

TEST_CASE("failure re-optimization handles edge cases") {
    ArrayGeometry geo(6, 0.5, ElementPattern::Isotropic);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.5);
    const auto manifold = array_manifold(geo, grid);
    const auto mask = build_mask(90.0, 8.0, 12.0, 16.0, grid);

    std::vector<FullAaaWeights> refs;
    for (double t : {80.0, 90.0, 100.0}) {
        FullAaaWeights r;
        r.tilt_deg = t;
        r.weights = steering_vector(geo, t).conjugate();
        r.weights /= r.weights.norm();
        refs.push_back(std::move(r));
    }
    RfbnMatrix w = dominant_basis(min_transceivers(stack_tilts(refs), 0.9), 3);
    SolverSettings settings;

    // Empty failure set behaves exactly like optimize_dbf.
    auto [d0, r0] = reoptimize_on_failure(w, {}, manifold, mask, settings);
    auto [d1, r1] = optimize_dbf(w, manifold, mask, settings);
    CHECK((d0.weights - d1.weights).norm() < 1e-12);

    // Failing all but one transceiver leaves a single-column matched problem.
    auto [d2, r2] = reoptimize_on_failure(w, {0, 1}, manifold, mask, settings);
    CHECK(d2.weights[0] == cplx(0.0, 0.0));
    CHECK(d2.weights[1] == cplx(0.0, 0.0));
    const cplx main = steering_vector(geo, mask.tilt_deg).transpose() * (w.entries * d2.weights);
    CHECK(std::abs(main - cplx(1.0, 0.0)) < 1e-6);

    CHECK_THROWS_AS(reoptimize_on_failure(w, {0, 1, 2}, manifold, mask, settings),
                    std::invalid_argument);
    CHECK_THROWS_AS(reoptimize_on_failure(w, {7}, manifold, mask, settings),
                    std::invalid_argument);
}

TEST_CASE("optimize_joint validates its inputs") {
    ArrayGeometry geo(4, 0.5, ElementPattern::Isotropic);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 1.0);
    const auto manifold = array_manifold(geo, grid);
    const auto mask = build_mask(90.0, 10.0, 10.0, 20.0, grid);
    SolverSettings settings;
    CHECK_THROWS_AS(
        optimize_joint(manifold, TiltSet({90.0}), {mask}, 0, std::nullopt, settings),
        std::invalid_argument);
    CHECK_THROWS_AS(optimize_joint(manifold, TiltSet({90.0}), {}, 2, std::nullopt, settings),
                    std::invalid_argument);
    const auto other_grid = AngularGrid::uniform(0.0, 180.0, 0.5);
    const auto bad_mask = build_mask(90.0, 10.0, 10.0, 20.0, other_grid);
    CHECK_THROWS_AS(
        optimize_joint(manifold, TiltSet({90.0}), {bad_mask}, 2, std::nullopt, settings),
        std::invalid_argument);
}
