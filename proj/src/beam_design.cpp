#include "hybridbf/beam_design.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace hybridbf {

namespace {

BeamProblem assemble(const MaskedDesignInput& in, const Eigen::VectorXcd& anchor_point) {
    const Eigen::Index n = in.main_row.size();
    BeamProblem p;
    // Tiny norm ridge keeps the reduced Hessian positive definite and makes
    // the constraint-only case (no sidelobe rows) resolve to the matched,
    // minimum-norm solution.
    const double ridge = (in.sll_rows.rows() == 0) ? 1.0 : 1e-9;
    p.objective_rows.resize(in.sll_rows.rows() + n, n);
    p.objective_rows.topRows(in.sll_rows.rows()) = in.sll_rows;
    p.objective_rows.bottomRows(n) =
        std::sqrt(ridge) * Eigen::MatrixXcd::Identity(n, n);
    p.mainlobe = in.main_row.conjugate().transpose();  // h with h^H x = main_row * x

    for (Eigen::Index i = 0; i < in.sll_rows.rows(); ++i) {
        QuadCeiling q;
        q.c = in.sll_rows.row(i).conjugate().transpose();
        q.ubound = in.sll_ceiling;
        q.label = "sll[" + std::to_string(i) + "]";
        p.ceilings.push_back(std::move(q));
    }
    for (Eigen::Index i = 0; i < in.hp_rows.rows(); ++i) {
        const Eigen::VectorXcd c = in.hp_rows.row(i).conjugate().transpose();
        QuadCeiling q;
        q.c = c;
        q.ubound = in.hp_hi;
        q.label = "halfpower_hi[" + std::to_string(i) + "]";
        p.ceilings.push_back(std::move(q));

        LinFloor f;
        const cplx resp = in.hp_rows.row(i) * anchor_point;
        const double phase = (std::abs(resp) > 1e-12) ? std::arg(resp) : 0.0;
        f.d = c * std::polar(1.0, phase);  // Re(e^{-j phase} row x) >= sqrt(lo)
        f.level = std::sqrt(in.hp_lo);
        f.label = "halfpower_lo[" + std::to_string(i) + "]";
        p.floors.push_back(std::move(f));
    }
    if (in.pa_box.has_value()) {
        for (Eigen::Index k = 0; k < n; ++k) {
            Eigen::VectorXcd ek = Eigen::VectorXcd::Zero(n);
            ek[k] = cplx(1.0, 0.0);
            QuadCeiling q{ek, in.pa_box->hi[k], "pa_hi[" + std::to_string(k) + "]"};
            p.ceilings.push_back(std::move(q));

            LinFloor f;
            const double phase = (std::abs(anchor_point[k]) > 1e-12)
                                     ? std::arg(anchor_point[k]) : 0.0;
            f.d = ek * std::polar(1.0, phase);
            f.level = std::sqrt(in.pa_box->lo[k]);
            f.label = "pa_lo[" + std::to_string(k) + "]";
            p.floors.push_back(std::move(f));
        }
    }
    return p;
}

bool has_floors(const MaskedDesignInput& in) {
    return in.hp_rows.rows() > 0 || in.pa_box.has_value();
}

double max_anchor_shift_rad(const MaskedDesignInput& in, const Eigen::VectorXcd& a,
                            const Eigen::VectorXcd& b) {
    auto wrap = [](double r) {
        while (r > std::numbers::pi) r -= 2.0 * std::numbers::pi;
        while (r < -std::numbers::pi) r += 2.0 * std::numbers::pi;
        return std::abs(r);
    };
    double shift = 0.0;
    for (Eigen::Index i = 0; i < in.hp_rows.rows(); ++i) {
        const cplx ra = in.hp_rows.row(i) * a;
        const cplx rb = in.hp_rows.row(i) * b;
        if (std::abs(ra) > 1e-12 && std::abs(rb) > 1e-12)
            shift = std::max(shift, wrap(std::arg(ra) - std::arg(rb)));
    }
    if (in.pa_box.has_value()) {
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            if (std::abs(a[k]) > 1e-12 && std::abs(b[k]) > 1e-12)
                shift = std::max(shift, wrap(std::arg(a[k]) - std::arg(b[k])));
        }
    }
    return shift;
}

}  // namespace

MaskedDesignResult design_masked_weights(const MaskedDesignInput& in,
                                         const BarrierOptions& options,
                                         const Eigen::VectorXcd* warm_start) {
    const Eigen::Index n = in.main_row.size();
    if (n < 1) throw std::invalid_argument("design_masked_weights: empty problem");
    if (in.sll_rows.rows() > 0 && in.sll_rows.cols() != n)
        throw std::invalid_argument("design_masked_weights: row width mismatch");

    // Default warm start: matched weights scaled to unit mainlobe response.
    Eigen::VectorXcd warm;
    if (warm_start != nullptr && warm_start->size() == n) {
        warm = *warm_start;
    } else {
        warm = in.main_row.conjugate().transpose() / in.main_row.squaredNorm();
    }
    {
        const cplx resp = in.main_row * warm;
        if (std::abs(resp) > 1e-12) warm /= resp;
    }

    MaskedDesignResult out;
    const int rounds = has_floors(in) ? 3 : 1;
    Eigen::VectorXcd anchor = warm;
    BarrierResult res;
    for (int round = 0; round < rounds; ++round) {
        BeamProblem problem = assemble(in, anchor);
        res = solve_beam_problem(problem, options, &warm);
        out.newton_iterations += res.newton_iterations;
        if (round + 1 < rounds) {
            // Re-anchor on the solution; a feasible solve whose anchors did
            // not move is already converged.
            const bool moved =
                max_anchor_shift_rad(in, anchor, res.x) >= 1.0 * std::numbers::pi / 180.0;
            if (res.feasible && !moved) break;
            anchor = res.x;
            warm = res.x;
        }
    }
    // Tie-break pass: hold the sidelobe power near its optimum and pull the
    // response toward the mask target.
    if (res.feasible && in.tracking_rows.rows() > 0 && in.sll_rows.rows() > 0 &&
        in.tracking_rows.cols() == n) {
        const double p_star = (in.sll_rows * res.x).squaredNorm();
        BeamProblem problem = assemble(in, res.x);
        const Eigen::Index kt = in.tracking_rows.rows();
        problem.objective_rows.resize(kt + n, n);
        problem.objective_rows.topRows(kt) = in.tracking_rows;
        problem.objective_rows.bottomRows(n) =
            std::sqrt(1e-9) * Eigen::MatrixXcd::Identity(n, n);
        problem.objective_target = Eigen::VectorXcd::Zero(kt + n);
        problem.objective_target.head(kt) = in.tracking_target;
        problem.ball_rows = in.sll_rows;
        problem.ball_bound = (1.0 + in.tracking_slack) * p_star + 1e-12;
        Eigen::VectorXcd warm2 = res.x;
        const BarrierResult res2 = solve_beam_problem(problem, options, &warm2);
        out.newton_iterations += res2.newton_iterations;
        if (res2.feasible) res = res2;
    }

    out.x = res.x;
    out.feasible = res.feasible;
    out.sidelobe_power = (in.sll_rows.rows() > 0) ? (in.sll_rows * res.x).squaredNorm()
                                                  : res.x.squaredNorm();
    out.max_scaled_violation = res.max_scaled_violation;
    out.worst_constraint = res.worst_constraint;
    return out;
}

}  // namespace hybridbf
