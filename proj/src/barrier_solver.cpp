#include "hybridbf/barrier_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hybridbf {

namespace {

// Real embedding z = [Re x; Im x].  For a complex vector c,
// Re(c^H x) = ru(c)^T z and Im(c^H x) = rv(c)^T z.
Eigen::VectorXd ru(const Eigen::VectorXcd& c) {
    Eigen::VectorXd v(2 * c.size());
    v << c.real(), c.imag();
    return v;
}

Eigen::VectorXd rv(const Eigen::VectorXcd& c) {
    Eigen::VectorXd v(2 * c.size());
    v << -c.imag(), c.real();
    return v;
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& z) {
    const Eigen::Index n = z.size() / 2;
    Eigen::VectorXcd x(n);
    x.real() = z.head(n);
    x.imag() = z.tail(n);
    return x;
}

// Inequalities reduced to the equality-free coordinates y (z = zp + N y).
struct ReducedProblem {
    // Objective 0.5 y^T P y + q^T y (+ const, dropped).
    Eigen::MatrixXd P;
    Eigen::VectorXd q;

    // Ceilings: g_i = (Au y + bu)_i^2 + (Av y + bv)_i^2 - ub_i <= 0.
    Eigen::MatrixXd Au, Av;
    Eigen::VectorXd bu, bv, ub;
    // Floors as linear constraints: g_j = (L y + e)_j <= 0.
    Eigen::MatrixXd L;
    Eigen::VectorXd e;
    // Aggregate ball: |Bu y + cb_u|^2 + |Bv y + cb_v|^2 <= ball_bound.
    bool has_ball = false;
    Eigen::MatrixXd Bu, Bv;
    Eigen::VectorXd cbu, cbv;
    double ball_bound = 0.0;

    Eigen::VectorXd scale_q, scale_l;  // per-constraint violation scales
    std::vector<std::string> labels_q, labels_l;

    Eigen::Index n_y() const { return P.rows(); }
    Eigen::Index n_q() const { return ub.size(); }
    Eigen::Index n_l() const { return e.size(); }
    Eigen::Index n_ineq() const { return n_q() + n_l() + (has_ball ? 1 : 0); }

    void responses(const Eigen::VectorXd& y, Eigen::VectorXd& u, Eigen::VectorXd& v,
                   Eigen::VectorXd& gq, Eigen::VectorXd& gl) const {
        u = Au * y + bu;
        v = Av * y + bv;
        gq = u.array().square() + v.array().square() - ub.array();
        gl = L * y + e;
    }

    double ball_g(const Eigen::VectorXd& y, Eigen::VectorXd& ub_resp,
                  Eigen::VectorXd& vb_resp) const {
        ub_resp = Bu * y + cbu;
        vb_resp = Bv * y + cbv;
        return ub_resp.squaredNorm() + vb_resp.squaredNorm() - ball_bound;
    }

    double objective(const Eigen::VectorXd& y) const {
        return 0.5 * y.dot(P * y) + q.dot(y);
    }
};

struct WorstViolation {
    double value = -std::numeric_limits<double>::infinity();
    std::string label;
};

WorstViolation worst_scaled(const ReducedProblem& rp, const Eigen::VectorXd& y) {
    Eigen::VectorXd u, v, gq, gl;
    rp.responses(y, u, v, gq, gl);
    WorstViolation w;
    for (Eigen::Index i = 0; i < gq.size(); ++i) {
        const double s = gq[i] / rp.scale_q[i];
        if (s > w.value) { w.value = s; w.label = rp.labels_q[i]; }
    }
    for (Eigen::Index j = 0; j < gl.size(); ++j) {
        const double s = gl[j] / rp.scale_l[j];
        if (s > w.value) { w.value = s; w.label = rp.labels_l[j]; }
    }
    if (rp.has_ball) {
        Eigen::VectorXd ub_resp, vb_resp;
        const double s = rp.ball_g(y, ub_resp, vb_resp) / std::max(rp.ball_bound, 1e-12);
        if (s > w.value) { w.value = s; w.label = "power_ball"; }
    }
    return w;
}

// Newton minimization of  f(y) + mu * barrier(y)  for one barrier stage.
// With the feasibility phase active the constraints relax to
// g_i <= slack * scale_i and the objective becomes the slack itself.
struct StageConfig {
    double mu = 1.0;
    bool phase1 = false;
    double newton_tol = 1e-10;
    int max_iter = 120;
};

int newton_stage(const ReducedProblem& rp, const StageConfig& cfg, Eigen::VectorXd& state,
                 int budget) {
    const Eigen::Index m = rp.n_y();
    const Eigen::Index dim = cfg.phase1 ? m + 1 : m;
    const double ball_scale = std::max(rp.ball_bound, 1e-12);
    Eigen::VectorXd u, v, gq, gl, ball_u, ball_v;

    auto barrier_value = [&](const Eigen::VectorXd& st, bool& interior) -> double {
        Eigen::VectorXd y = st.head(m);
        rp.responses(y, u, v, gq, gl);
        const double s = cfg.phase1 ? st[m] : 0.0;
        double val = cfg.phase1 ? s : rp.objective(y);
        interior = true;
        for (Eigen::Index i = 0; i < gq.size(); ++i) {
            const double gi = gq[i] - (cfg.phase1 ? s * rp.scale_q[i] : 0.0);
            if (gi >= 0.0) { interior = false; return 0.0; }
            val -= cfg.mu * std::log(-gi);
        }
        for (Eigen::Index j = 0; j < gl.size(); ++j) {
            const double gj = gl[j] - (cfg.phase1 ? s * rp.scale_l[j] : 0.0);
            if (gj >= 0.0) { interior = false; return 0.0; }
            val -= cfg.mu * std::log(-gj);
        }
        if (rp.has_ball) {
            const double gb =
                rp.ball_g(y, ball_u, ball_v) - (cfg.phase1 ? s * ball_scale : 0.0);
            if (gb >= 0.0) { interior = false; return 0.0; }
            val -= cfg.mu * std::log(-gb);
        }
        return val;
    };

    int used = 0;
    for (int iter = 0; iter < cfg.max_iter && used < budget; ++iter, ++used) {
        Eigen::VectorXd y = state.head(m);
        rp.responses(y, u, v, gq, gl);
        const double s = cfg.phase1 ? state[m] : 0.0;

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
        if (cfg.phase1) {
            grad[m] = 1.0;
        } else {
            grad.head(m) = rp.P * y + rp.q;
            hess.topLeftCorner(m, m) = rp.P;
        }

        // Quadratic ceilings: grad g = [2(u Au + v Av), -scale], plus the
        // constant curvature 2(Au^T Au + Av^T Av) weighted by mu * (-1/g).
        Eigen::VectorXd gq_eff = gq;
        if (cfg.phase1) gq_eff -= s * rp.scale_q;
        if (gq.size() > 0) {
            Eigen::VectorXd inv_g = -gq_eff.cwiseInverse();  // positive
            Eigen::VectorXd wu = 2.0 * u.array() * inv_g.array() * cfg.mu;
            Eigen::VectorXd wv = 2.0 * v.array() * inv_g.array() * cfg.mu;
            grad.head(m) += rp.Au.transpose() * wu + rp.Av.transpose() * wv;
            if (cfg.phase1) grad[m] -= cfg.mu * rp.scale_q.dot(inv_g);

            Eigen::MatrixXd Aus =
                rp.Au.array().colwise() * (2.0 * cfg.mu * inv_g.array()).sqrt();
            Eigen::MatrixXd Avs =
                rp.Av.array().colwise() * (2.0 * cfg.mu * inv_g.array()).sqrt();
            hess.topLeftCorner(m, m) += Aus.transpose() * Aus + Avs.transpose() * Avs;

            Eigen::MatrixXd Gy = 2.0 * (rp.Au.array().colwise() * u.array() +
                                        rp.Av.array().colwise() * v.array());
            Eigen::MatrixXd Gfull(gq.size(), dim);
            Gfull.leftCols(m) = Gy;
            if (cfg.phase1) Gfull.col(m) = -rp.scale_q;
            Eigen::MatrixXd Gs = Gfull.array().colwise() * (inv_g.array() * std::sqrt(cfg.mu));
            hess += Gs.transpose() * Gs;
        }

        // Linear floors
        Eigen::VectorXd gl_eff = gl;
        if (cfg.phase1) gl_eff -= s * rp.scale_l;
        if (gl.size() > 0) {
            Eigen::VectorXd inv_l = -gl_eff.cwiseInverse();
            grad.head(m) += rp.L.transpose() * (cfg.mu * inv_l);
            if (cfg.phase1) grad[m] -= cfg.mu * rp.scale_l.dot(inv_l);
            Eigen::MatrixXd Lfull(gl.size(), dim);
            Lfull.leftCols(m) = rp.L;
            if (cfg.phase1) Lfull.col(m) = -rp.scale_l;
            Eigen::MatrixXd Ls = Lfull.array().colwise() * (inv_l.array() * std::sqrt(cfg.mu));
            hess += Ls.transpose() * Ls;
        }

        // Aggregate power ball
        if (rp.has_ball) {
            double gb = rp.ball_g(y, ball_u, ball_v);
            if (cfg.phase1) gb -= s * ball_scale;
            const double inv_b = -1.0 / gb;
            Eigen::VectorXd grad_ball_y =
                2.0 * (rp.Bu.transpose() * ball_u + rp.Bv.transpose() * ball_v);
            grad.head(m) += cfg.mu * inv_b * grad_ball_y;
            if (cfg.phase1) grad[m] -= cfg.mu * inv_b * ball_scale;
            hess.topLeftCorner(m, m) +=
                2.0 * cfg.mu * inv_b *
                (rp.Bu.transpose() * rp.Bu + rp.Bv.transpose() * rp.Bv);
            Eigen::VectorXd gfull = Eigen::VectorXd::Zero(dim);
            gfull.head(m) = grad_ball_y;
            if (cfg.phase1) gfull[m] = -ball_scale;
            hess += (cfg.mu * inv_b * inv_b) * (gfull * gfull.transpose());
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd step;
        if (ldlt.info() == Eigen::Success) {
            step = ldlt.solve(-grad);
        }
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
            step = hess.ldlt().solve(-grad);
            if (!step.allFinite()) break;
        }

        const double decrement = -grad.dot(step);
        if (decrement / 2.0 <= cfg.newton_tol) break;

        bool interior = false;
        const double f_cur = barrier_value(state, interior);
        double t = 1.0;
        Eigen::VectorXd trial;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            trial = state + t * step;
            bool ok = false;
            const double f_trial = barrier_value(trial, ok);
            if (ok && f_trial <= f_cur - 0.25 * t * decrement) { accepted = true; break; }
            t *= 0.5;
        }
        if (!accepted) break;
        state = trial;

        // Feasibility phase exits as soon as a strictly interior point exists.
        if (cfg.phase1 && state[m] < -1e-3) break;
    }
    return used;
}

}  // namespace

BarrierResult solve_beam_problem(const BeamProblem& problem, const BarrierOptions& options,
                                 const Eigen::VectorXcd* warm_start) {
    const Eigen::Index n = problem.mainlobe.size();
    if (n < 1) throw std::invalid_argument("solve_beam_problem: empty problem");
    const double hnorm2 = problem.mainlobe.squaredNorm();
    if (!(hnorm2 > 0.0))
        throw std::invalid_argument("solve_beam_problem: zero mainlobe response vector");

    // Equality elimination: E z = [1; 0] with orthogonal rows e1, e2.
    const Eigen::VectorXd e1 = ru(problem.mainlobe);
    const Eigen::VectorXd e2 = rv(problem.mainlobe);
    Eigen::MatrixXd basis(2 * n, 2);
    basis.col(0) = e1;
    basis.col(1) = e2;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(2 * n, 2 * n);
    const Eigen::MatrixXd N = Qfull.rightCols(2 * n - 2);
    const Eigen::VectorXd zp = e1 / hnorm2;  // least-norm solution

    ReducedProblem rp;
    const Eigen::Index m = 2 * n - 2;
    {
        // Objective |R x - t|^2 on the real embedding.
        const Eigen::MatrixXcd& R = problem.objective_rows;
        Eigen::MatrixXcd Q = R.adjoint() * R;
        Eigen::MatrixXd M(2 * n, 2 * n);
        M << Q.real(), -Q.imag(), Q.imag(), Q.real();
        Eigen::VectorXd lin = Eigen::VectorXd::Zero(2 * n);
        if (problem.objective_target.size() == R.rows() && R.rows() > 0)
            lin = ru(R.adjoint() * problem.objective_target);
        rp.P = 2.0 * N.transpose() * M * N;
        rp.q = 2.0 * N.transpose() * (M * zp - lin);
    }
    const Eigen::Index nq = static_cast<Eigen::Index>(problem.ceilings.size());
    const Eigen::Index nl = static_cast<Eigen::Index>(problem.floors.size());
    rp.Au.resize(nq, m); rp.Av.resize(nq, m);
    rp.bu.resize(nq); rp.bv.resize(nq); rp.ub.resize(nq);
    rp.scale_q.resize(nq);
    for (Eigen::Index i = 0; i < nq; ++i) {
        const auto& ci = problem.ceilings[i];
        const Eigen::VectorXd au = ru(ci.c), av = rv(ci.c);
        rp.Au.row(i) = (N.transpose() * au).transpose();
        rp.Av.row(i) = (N.transpose() * av).transpose();
        rp.bu[i] = au.dot(zp);
        rp.bv[i] = av.dot(zp);
        rp.ub[i] = ci.ubound;
        rp.scale_q[i] = std::max(ci.ubound, 1e-9);
        rp.labels_q.push_back(ci.label);
    }
    rp.L.resize(nl, m);
    rp.e.resize(nl);
    rp.scale_l.resize(nl);
    for (Eigen::Index j = 0; j < nl; ++j) {
        const auto& fj = problem.floors[j];
        const Eigen::VectorXd ad = ru(fj.d);
        // Re(d^H x) >= level  ->  level - Re(d^H x) <= 0
        rp.L.row(j) = (-(N.transpose() * ad)).transpose();
        rp.e[j] = fj.level - ad.dot(zp);
        rp.scale_l[j] = std::max(std::abs(fj.level), 1e-3);
        rp.labels_l.push_back(fj.label);
    }
    if (problem.ball_bound > 0.0 && problem.ball_rows.rows() > 0) {
        const Eigen::Index kb = problem.ball_rows.rows();
        rp.has_ball = true;
        rp.ball_bound = problem.ball_bound;
        rp.Bu.resize(kb, m); rp.Bv.resize(kb, m);
        rp.cbu.resize(kb); rp.cbv.resize(kb);
        for (Eigen::Index i = 0; i < kb; ++i) {
            const Eigen::VectorXcd c = problem.ball_rows.row(i).conjugate().transpose();
            const Eigen::VectorXd au = ru(c), av = rv(c);
            rp.Bu.row(i) = (N.transpose() * au).transpose();
            rp.Bv.row(i) = (N.transpose() * av).transpose();
            rp.cbu[i] = au.dot(zp);
            rp.cbv[i] = av.dot(zp);
        }
    }

    // Starting point: warm start projected onto the equality manifold.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    if (warm_start != nullptr && warm_start->size() == n) {
        Eigen::VectorXcd w = *warm_start;
        const cplx resp = problem.mainlobe.dot(w);  // h^H x
        if (std::abs(resp) > 1e-12) w /= resp;      // rotate+scale to h^H x = 1
        Eigen::VectorXd zw(2 * n);
        zw << w.real(), w.imag();
        y = N.transpose() * (zw - zp);
    }

    BarrierResult result;
    int budget = options.max_newton;

    WorstViolation w0 = worst_scaled(rp, y);

    // Feasibility phase whenever the start is not strictly interior.
    if (rp.n_ineq() > 0 && w0.value > -1e-6) {
        Eigen::VectorXd state(m + 1);
        state.head(m) = y;
        state[m] = std::max(w0.value * 1.5, 1e-3) + 1e-3;
        StageConfig cfg;
        cfg.phase1 = true;
        double mu = std::max(1.0, std::abs(state[m]));
        for (int stage = 0; stage < 60 && budget > 0; ++stage) {
            cfg.mu = mu;
            result.newton_iterations += newton_stage(rp, cfg, state, budget);
            budget = options.max_newton - result.newton_iterations;
            if (state[m] < -1e-3) break;  // strictly interior found
            const double gap = mu * static_cast<double>(rp.n_ineq() + 1);
            if (gap < options.tolerance * 1e-2) break;
            mu *= options.shrink;
        }
        y = state.head(m);
        w0 = worst_scaled(rp, y);
    }

    if (w0.value < 0.0) {
        // Main phase from the strictly feasible point.
        StageConfig cfg;
        double mu = options.mu0;
        for (int stage = 0; stage < 80 && budget > 0; ++stage) {
            cfg.mu = mu;
            result.newton_iterations += newton_stage(rp, cfg, y, budget);
            budget = options.max_newton - result.newton_iterations;
            const double gap = mu * static_cast<double>(std::max<Eigen::Index>(rp.n_ineq(), 1));
            if (gap < options.tolerance) break;
            mu *= options.shrink;
        }
        w0 = worst_scaled(rp, y);
        result.feasible = true;
    } else {
        result.feasible = false;
    }

    result.x = to_complex(zp + N * y);
    if (problem.objective_target.size() == problem.objective_rows.rows() &&
        problem.objective_rows.rows() > 0) {
        result.objective =
            (problem.objective_rows * result.x - problem.objective_target).squaredNorm();
    } else {
        result.objective = (problem.objective_rows * result.x).squaredNorm();
    }
    result.max_scaled_violation = std::max(w0.value, 0.0);
    result.worst_constraint = w0.label;
    return result;
}

}  // namespace hybridbf
