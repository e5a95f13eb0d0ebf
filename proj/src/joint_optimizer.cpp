#include "hybridbf/joint_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "hybridbf/beam_design.hpp"
#include "hybridbf/reference_beamformer.hpp"
#include "hybridbf/rfbn_factorizer.hpp"
#include "hybridbf/transceiver_bound.hpp"

namespace hybridbf {

namespace {

Eigen::MatrixXcd rows_at(const ArrayManifold& manifold, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(idx.size()), manifold.n_elements());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            manifold.rows.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

struct DbfProblemRows {
    Eigen::MatrixXcd sll;      // A_sll * W
    Eigen::RowVectorXcd main;  // a(theta_d)^T W
    Eigen::MatrixXcd hp;       // two half-power rows times W
};

DbfProblemRows dbf_rows(const Eigen::MatrixXcd& w, const ArrayManifold& manifold,
                        const SpectralMask& mask) {
    DbfProblemRows r;
    r.sll = rows_at(manifold, mask.sll_region) * w;
    r.main = steering_vector(manifold.geometry, mask.tilt_deg).transpose() * w;
    r.hp.resize(2, w.cols());
    r.hp.row(0) =
        steering_vector(manifold.geometry, mask.halfpower_angles_deg[0]).transpose() * w;
    r.hp.row(1) =
        steering_vector(manifold.geometry, mask.halfpower_angles_deg[1]).transpose() * w;
    return r;
}

// Mask fit system over mainlobe and sidelobe rows (the least-squares
// problem that also warm-starts the constrained solve).
void mask_fit_system(const Eigen::MatrixXcd& w, const ArrayManifold& manifold,
                     const SpectralMask& mask, Eigen::MatrixXcd& H, Eigen::VectorXcd& target) {
    const std::size_t n_rows = mask.mainlobe_region.size() + mask.sll_region.size();
    H.resize(static_cast<Eigen::Index>(n_rows), w.cols());
    target = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_rows));
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < mask.mainlobe_region.size(); ++i, ++r) {
        H.row(r) = manifold.rows.row(static_cast<Eigen::Index>(mask.mainlobe_region[i])) * w;
        target[r] = mask.mainlobe_target[i];
    }
    for (std::size_t idx : mask.sll_region)
        H.row(r++) = manifold.rows.row(static_cast<Eigen::Index>(idx)) * w;
}

void fill_violations(const Eigen::MatrixXcd& w, const ArrayManifold& manifold,
                     const SpectralMask& mask, const Eigen::VectorXcd& dbf,
                     SolveReport& report) {
    const DbfProblemRows rows = dbf_rows(w, manifold, mask);
    auto bump = [&report](const std::string& key, double slack) {
        auto it = report.constraint_violations.find(key);
        if (it == report.constraint_violations.end() || it->second < slack)
            report.constraint_violations[key] = slack;
    };
    bump("mainlobe_equality", std::abs(cplx(rows.main * dbf) - cplx(1.0, 0.0)));
    double sll_slack = 0.0;
    if (rows.sll.rows() > 0) {
        const Eigen::VectorXd power = (rows.sll * dbf).cwiseAbs2();
        sll_slack = std::max(0.0, power.maxCoeff() - mask.sll_ceiling_linear);
    }
    bump("sidelobe_ceiling", sll_slack);
    double hp_slack = 0.0;
    for (Eigen::Index i = 0; i < rows.hp.rows(); ++i) {
        const double p = std::norm(cplx(rows.hp.row(i) * dbf));
        hp_slack = std::max({hp_slack, p - 0.55, 0.45 - p});
    }
    bump("halfpower_window", std::max(hp_slack, 0.0));
}

}  // namespace

Eigen::VectorXcd DbfWeights::pa_normalized() const {
    const Eigen::Index n = weights.size();
    Eigen::VectorXcd out = weights;
    if (pa_reference_powers.size() != n) return out;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double ref = pa_reference_powers[k];
        if (ref > 0.0) out[k] /= std::sqrt(static_cast<double>(n) * ref);
    }
    return out;
}

Eigen::MatrixXcd DbfBank::matrix() const {
    if (entries.empty()) return {};
    Eigen::MatrixXcd m(entries.front().weights.size(),
                       static_cast<Eigen::Index>(entries.size()));
    for (std::size_t c = 0; c < entries.size(); ++c)
        m.col(static_cast<Eigen::Index>(c)) = entries[c].weights;
    return m;
}

std::pair<DbfWeights, SolveReport> optimize_dbf(const RfbnMatrix& rfbn,
                                                const ArrayManifold& manifold,
                                                const SpectralMask& mask,
                                                const SolverSettings& settings) {
    if (rfbn.entries.rows() != manifold.n_elements())
        throw std::invalid_argument("optimize_dbf: RFBN row count mismatch");
    if (mask.grid_size != manifold.n_angles())
        throw std::invalid_argument("optimize_dbf: mask and manifold grids differ");

    const DbfProblemRows rows = dbf_rows(rfbn.entries, manifold, mask);
    MaskedDesignInput in;
    in.sll_rows = rows.sll;
    in.sll_ceiling = mask.sll_ceiling_linear;
    in.main_row = rows.main;
    in.hp_rows = rows.hp;
    mask_fit_system(rfbn.entries, manifold, mask, in.tracking_rows, in.tracking_target);

    BarrierOptions options;
    options.tolerance = settings.tolerance;
    options.mu0 = settings.barrier_mu0;
    options.shrink = settings.barrier_shrink;
    options.max_newton = settings.max_newton;

    Eigen::VectorXcd warm =
        in.tracking_rows.completeOrthogonalDecomposition().solve(in.tracking_target);

    MaskedDesignResult res = design_masked_weights(in, options, &warm);
    Eigen::VectorXd corridor_floor;
    if (settings.pa_box) {
        // Corridor anchors: the configured design-point powers, or the
        // box-free solution of this very problem.  Each PA power is then
        // confined to a corridor_db-wide window centered on its anchor
        // (the linear-mode operating window of [C4]).
        const double half_span = std::pow(10.0, settings.pa_corridor_db / 20.0);
        Eigen::VectorXd anchors;
        if (settings.pa_reference_powers.size() == rfbn.entries.cols()) {
            anchors = settings.pa_reference_powers;
            // The corridor constrains the taper shape; the common drive
            // scale follows this tilt's own solution.
            const double own = res.x.cwiseAbs2().mean();
            const double ref = anchors.mean();
            if (own > 0.0 && ref > 0.0) anchors *= own / ref;
        } else {
            anchors = res.x.cwiseAbs2();
        }
        anchors = anchors.cwiseMax(1e-12);
        corridor_floor = anchors / half_span;
        PaBox box;
        box.lo = corridor_floor;
        box.hi = anchors * half_span;
        in.pa_box = box;
        warm = res.x;
        res = design_masked_weights(in, options, &warm);
    }

    DbfWeights dbf;
    dbf.tilt_deg = mask.tilt_deg;
    dbf.weights = res.x;
    dbf.pa_reference_powers = corridor_floor;

    SolveReport report;
    report.converged = res.feasible;
    report.iterations = res.newton_iterations;
    report.sidelobe_power = res.sidelobe_power;
    report.final_cost = res.sidelobe_power;
    fill_violations(rfbn.entries, manifold, mask, res.x, report);
    if (settings.pa_box) {
        const double span = std::pow(10.0, settings.pa_corridor_db / 10.0);
        double slack = 0.0;
        for (Eigen::Index k = 0; k < res.x.size(); ++k) {
            const double p = std::norm(res.x[k]);
            const double lo = corridor_floor[k];
            slack = std::max({slack, (lo - p) / lo, (p - lo * span) / lo});
        }
        report.constraint_violations["pa_corridor"] = std::max(slack, 0.0);
    }
    if (!res.feasible) {
        report.condition_metadata = "infeasible; worst constraint: " + res.worst_constraint +
                                    " (scaled slack " +
                                    std::to_string(res.max_scaled_violation) + ")";
    }
    return {std::move(dbf), std::move(report)};
}

std::pair<DbfWeights, SolveReport> reoptimize_on_failure(const RfbnMatrix& rfbn,
                                                         const std::set<int>& failed_tx,
                                                         const ArrayManifold& manifold,
                                                         const SpectralMask& mask,
                                                         const SolverSettings& settings) {
    const int n_trx = rfbn.n_transceivers();
    for (int k : failed_tx)
        if (k < 0 || k >= n_trx)
            throw std::invalid_argument("reoptimize_on_failure: bad transceiver index");
    if (static_cast<int>(failed_tx.size()) >= n_trx)
        throw std::invalid_argument("reoptimize_on_failure: all transceivers failed");
    if (failed_tx.empty()) return optimize_dbf(rfbn, manifold, mask, settings);

    RfbnMatrix reduced;
    reduced.entries.resize(rfbn.entries.rows(),
                           n_trx - static_cast<Eigen::Index>(failed_tx.size()));
    std::vector<int> keep;
    for (int j = 0; j < n_trx; ++j)
        if (!failed_tx.count(j)) {
            reduced.entries.col(static_cast<Eigen::Index>(keep.size())) = rfbn.entries.col(j);
            keep.push_back(j);
        }

    auto [dbf_reduced, report] = optimize_dbf(reduced, manifold, mask, settings);
    DbfWeights full;
    full.tilt_deg = dbf_reduced.tilt_deg;
    full.weights = Eigen::VectorXcd::Zero(n_trx);
    for (std::size_t c = 0; c < keep.size(); ++c)
        full.weights[keep[c]] = dbf_reduced.weights[static_cast<Eigen::Index>(c)];
    report.condition_metadata =
        "degraded mode: " + std::to_string(failed_tx.size()) + " transceiver(s) disabled. " +
        report.condition_metadata;
    return {std::move(full), std::move(report)};
}

std::tuple<RfbnMatrix, DbfBank, SolveReport> optimize_joint(
    const ArrayManifold& manifold, const TiltSet& tilts,
    const std::vector<SpectralMask>& masks, int n_trx,
    const std::optional<InterconnectMask>& mask_S, const SolverSettings& settings) {
    if (n_trx < 1) throw std::invalid_argument("optimize_joint: n_trx must be >= 1");
    if (tilts.size() == 0) throw std::invalid_argument("optimize_joint: empty tilt set");
    if (masks.size() != tilts.size())
        throw std::invalid_argument("optimize_joint: one mask per tilt required");
    for (std::size_t d = 0; d < masks.size(); ++d) {
        if (masks[d].grid_size != manifold.n_angles())
            throw std::invalid_argument("optimize_joint: mask/grid mismatch");
        if (std::abs(masks[d].tilt_deg - tilts[d]) > 1e-9)
            throw std::invalid_argument("optimize_joint: mask tilt does not match tilt set");
    }
    if (mask_S.has_value() &&
        (mask_S->support.rows() != manifold.n_elements() || mask_S->support.cols() != n_trx))
        throw std::invalid_argument("optimize_joint: interconnect mask shape mismatch");

    const int n_t = manifold.n_elements();

    // Full-dimension references per tilt; the constrained design can be
    // infeasible for aggressive masks, in which case the LS fit stands in.
    std::vector<FullAaaWeights> refs;
    refs.reserve(tilts.size());
    for (std::size_t d = 0; d < tilts.size(); ++d) {
        try {
            refs.push_back(constrained_reference(manifold, masks[d]));
        } catch (const std::runtime_error&) {
            refs.push_back(ls_reference(manifold, masks[d]));
        }
    }
    const TiltMatrix theta = stack_tilts(refs);

    // Initialization.  Masked designs take the multi-stage Wiener
    // factorization (the mask-aware dominant-basis extraction), whose
    // chunk-local steering phases the combiner matching depends on; that W
    // stays fixed through the loop.  Dense designs start from the dominant
    // singular basis and keep the stacked least-squares refits.
    const bool refit_w = !mask_S.has_value();
    RfbnMatrix w;
    if (mask_S.has_value()) {
        w = multistage_wiener_factorize(theta, *mask_S);
    } else {
        const SvdBound bound = min_transceivers(theta, 0.995);
        const int avail = static_cast<int>(bound.left_vectors.cols());
        w.entries.resize(n_t, n_trx);
        const int take = std::min(avail, n_trx);
        w.entries.leftCols(take) = bound.left_vectors.leftCols(take);
        if (take < n_trx) {
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(bound.left_vectors);
            Eigen::MatrixXcd qfull =
                qr.householderQ() * Eigen::MatrixXcd::Identity(n_t, n_t);
            w.entries.rightCols(n_trx - take) = qfull.middleCols(take, n_trx - take);
        }
        if (settings.pa_box) {
            // With the PA corridor active the dominant basis is rotated by a
            // unitary DFT: the span is unchanged but every transceiver then
            // carries a comparable share of each beam, which is what keeps
            // near-equal PA drive feasible.
            Eigen::MatrixXcd dft(n_trx, n_trx);
            for (int r = 0; r < n_trx; ++r)
                for (int c = 0; c < n_trx; ++c)
                    dft(r, c) = std::polar(1.0 / std::sqrt(double(n_trx)),
                                           -2.0 * std::numbers::pi * r * c / n_trx);
            w.entries = w.entries * dft;
        }
        w.normalize_columns();
    }

    SolverSettings tilt_settings = settings;
    const bool derive_anchors =
        settings.pa_box && settings.pa_reference_powers.size() != n_trx;

    SolveReport report;
    DbfBank bank;
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_infeasible = masks.size() + 1;
    RfbnMatrix best_w = w;
    DbfBank best_bank;
    std::vector<SolveReport> best_tilt_reports;

    int iter = 0;
    bool stalled = false;
    for (; iter < settings.max_iterations; ++iter) {
        if (derive_anchors) {
            // PA operating points follow the current RFBN: anchor the
            // corridor at the design-range center's box-free drive.
            SolverSettings probe = settings;
            probe.pa_box = false;
            auto [center_dbf, center_rep] =
                optimize_dbf(w, manifold, masks[masks.size() / 2], probe);
            tilt_settings.pa_reference_powers =
                center_dbf.weights.cwiseAbs2().cwiseMax(1e-12);
        }

        // DBF half-step.
        bank.entries.clear();
        std::vector<SolveReport> tilt_reports;
        std::size_t infeasible = 0;
        for (std::size_t d = 0; d < tilts.size(); ++d) {
            auto [dbf, rep] = optimize_dbf(w, manifold, masks[d], tilt_settings);
            if (!rep.converged) ++infeasible;
            bank.entries.push_back(std::move(dbf));
            tilt_reports.push_back(std::move(rep));
        }
        const double cost = (theta.columns - w.entries * bank.matrix()).squaredNorm();

        // Feasibility first, then the stacked LS cost.
        const bool improves = infeasible < best_infeasible ||
                              (infeasible == best_infeasible && cost <= best_cost);
        if (improves) {
            const bool small_step = infeasible == best_infeasible &&
                                    (best_cost - cost) <=
                                        settings.tolerance * std::max(best_cost, 1e-12);
            best_cost = cost;
            best_infeasible = infeasible;
            best_w = w;
            best_bank = bank;
            best_tilt_reports = tilt_reports;
            report.iteration_costs.push_back(cost);
            if (small_step && iter > 0) { stalled = true; ++iter; break; }
        } else {
            // The alternation stopped descending: keep the best pair seen.
            stalled = true;
            ++iter;
            break;
        }

        if (!refit_w) {
            // Masked W stays fixed; the loop only refines the bank.
            stalled = true;
            ++iter;
            break;
        }

        // RFBN half-step: stacked per-row least squares against the
        // references, then column renormalization compensated in the bank.
        const Eigen::MatrixXcd upsilon = bank.matrix();
        for (Eigen::Index i = 0; i < n_t; ++i) {
            Eigen::MatrixXcd yt(upsilon.cols(), n_trx);
            for (Eigen::Index j = 0; j < n_trx; ++j) yt.col(j) = upsilon.row(j).transpose();
            const Eigen::VectorXcd sol =
                yt.completeOrthogonalDecomposition().solve(theta.columns.row(i).transpose());
            w.entries.row(i) = sol.transpose();
        }
        for (Eigen::Index j = 0; j < n_trx; ++j) {
            const double nrm = w.entries.col(j).norm();
            if (nrm > 1e-300) {
                w.entries.col(j) /= nrm;
                for (auto& e : bank.entries) e.weights[j] *= nrm;
            }
        }
    }

    // Final state: best (W, Upsilon) pair, with the bank solved under that W.
    w = best_w;
    bank = best_bank;
    // Canonical column phases (gauge only): W columns aligned at shared
    // rows, the bank rotated to keep every product W * theta unchanged.
    const Eigen::VectorXcd gauge = align_column_phases(w.entries);
    for (auto& entry : bank.entries)
        for (Eigen::Index j = 0; j < gauge.size(); ++j)
            entry.weights[j] *= std::conj(gauge[j]);
    report.iterations = iter;
    report.final_cost = best_cost;
    report.converged = stalled;
    double sll_power = 0.0;
    for (std::size_t d = 0; d < best_tilt_reports.size(); ++d) {
        const auto& rep = best_tilt_reports[d];
        sll_power += rep.sidelobe_power;
        for (const auto& [key, slack] : rep.constraint_violations) {
            auto it = report.constraint_violations.find(key);
            if (it == report.constraint_violations.end() || it->second < slack)
                report.constraint_violations[key] = slack;
        }
        if (!rep.converged) report.infeasible_tilts.push_back(d);
    }
    report.sidelobe_power = sll_power;
    if (!report.converged)
        report.condition_metadata = "alternation stopped at iteration cap";
    return {std::move(w), std::move(bank), std::move(report)};
}

}  // namespace hybridbf
