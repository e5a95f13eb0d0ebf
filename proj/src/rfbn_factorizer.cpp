#include "hybridbf/rfbn_factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hybridbf/microwave_sim.hpp"

namespace hybridbf {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kActiveTol = 1e-9;

double wrap_pi(double r) {
    while (r > std::numbers::pi) r -= 2.0 * std::numbers::pi;
    while (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}


}  // namespace

InterconnectMask InterconnectMask::from_column_runs(
    int n_rows, const std::vector<std::pair<int, int>>& runs) {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> s(n_rows,
                                                          static_cast<Eigen::Index>(runs.size()));
    s.setConstant(false);
    for (std::size_t j = 0; j < runs.size(); ++j) {
        const auto [first, len] = runs[j];
        if (first < 0 || len < 1 || first + len > n_rows)
            throw std::invalid_argument("InterconnectMask: run outside matrix");
        for (int i = first; i < first + len; ++i) s(i, static_cast<Eigen::Index>(j)) = true;
    }
    return InterconnectMask(std::move(s));
}

RfbnMatrix multistage_wiener_factorize(const TiltMatrix& theta_matrix,
                                       const InterconnectMask& mask) {
    const Eigen::Index n_t = theta_matrix.columns.rows();
    const Eigen::Index n_trx = mask.support.cols();
    if (mask.support.rows() != n_t)
        throw std::invalid_argument("multistage_wiener_factorize: mask row count mismatch");

    Eigen::MatrixXcd theta = theta_matrix.columns;
    Eigen::MatrixXcd w(n_t, n_trx);
    for (Eigen::Index k = 0; k < n_trx; ++k) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(theta, Eigen::ComputeThinU);
        const Eigen::VectorXcd u1 = svd.matrixU().col(0);
        Eigen::VectorXcd wk(n_t);
        for (Eigen::Index i = 0; i < n_t; ++i)
            wk[i] = mask.support(i, k) ? u1[i] : cplx(0.0, 0.0);
        const double nrm = wk.norm();
        if (nrm < 1e-12)
            throw std::runtime_error(
                "multistage_wiener_factorize: mask column " + std::to_string(k) +
                " annihilates the dominant singular vector");
        w.col(k) = wk / nrm;
        // Deflate by the accumulated columns, as in the source loop.
        const auto wk1 = w.leftCols(k + 1);
        theta = theta_matrix.columns - wk1 * (wk1.adjoint() * theta_matrix.columns);
    }
    align_column_phases(w);

    RfbnMatrix out;
    out.entries = std::move(w);
    out.mask = mask;
    out.normalize_columns();
    return out;
}

void apply_givens(Eigen::MatrixXcd& m, const GivensRotation& g) {
    const Eigen::RowVectorXcd row_k = m.row(g.row_k);
    const Eigen::RowVectorXcd row_i = m.row(g.row_i);
    m.row(g.row_k) = g.c * row_k + g.s * row_i;
    m.row(g.row_i) = -std::conj(g.s) * row_k + g.c * row_i;
}

namespace {

struct MismatchCandidate {
    int row = -1, col = -1;
    double score = 0.0;  // threshold-normalized mismatch
};

// Score per entry: worst threshold-normalized pairwise mismatch of the
// combiner input it generates, across all tilts and row peers.
std::vector<MismatchCandidate> mismatch_candidates(const Eigen::MatrixXcd& w,
                                                   const Eigen::MatrixXcd& upsilon,
                                                   const GivensSettings& settings) {
    std::vector<MismatchCandidate> out;
    const double phase_thr = settings.phase_threshold_deg / kRadToDeg;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (std::abs(w(i, j)) < kActiveTol) continue;
            double score = 0.0;
            for (Eigen::Index d = 0; d < upsilon.cols(); ++d) {
                const cplx tj = w(i, j) * upsilon(j, d);
                if (std::abs(tj) < kActiveTol) continue;
                for (Eigen::Index j2 = 0; j2 < w.cols(); ++j2) {
                    if (j2 == j || std::abs(w(i, j2)) < kActiveTol) continue;
                    const cplx t2 = w(i, j2) * upsilon(j2, d);
                    if (std::abs(t2) < kActiveTol) continue;
                    const double dphase = std::abs(wrap_pi(std::arg(tj) - std::arg(t2)));
                    const double damp =
                        std::abs(20.0 * std::log10(std::abs(tj) / std::abs(t2)));
                    score = std::max(score, dphase / phase_thr);
                    score = std::max(score, damp / settings.amplitude_threshold_db);
                }
            }
            if (score > 0.0) out.push_back({static_cast<int>(i), static_cast<int>(j), score});
        }
    }
    std::sort(out.begin(), out.end(), [](const MismatchCandidate& a, const MismatchCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    return out;
}

double mask_violation(const SolveReport& report) {
    double v = 0.0;
    for (const auto& [key, slack] : report.constraint_violations)
        if (key == "sidelobe_ceiling") v = std::max(v, slack);
    return v;
}

}  // namespace

GivensResult givens_sparsify(const RfbnMatrix& rfbn, const DbfBank& dbf_bank,
                             const GivensSettings& settings, const DbfReoptimize& reopt) {
    if (!(settings.phase_threshold_deg > 0.0))
        throw std::invalid_argument("givens_sparsify: threshold must be positive");
    if (dbf_bank.entries.empty() ||
        dbf_bank.entries.front().weights.size() != rfbn.entries.cols())
        throw std::invalid_argument("givens_sparsify: bank inconsistent with RFBN");

    GivensResult state{rfbn, dbf_bank, {}};
    state.rfbn.mask.reset();  // rotations do not preserve a fixed support

    std::vector<double> baseline_violation(dbf_bank.entries.size(), 0.0);

    for (int iter = 0; iter < settings.max_rotations; ++iter) {
        const Eigen::MatrixXcd upsilon = state.dbf_bank.matrix();
        const auto candidates = mismatch_candidates(state.rfbn.entries, upsilon, settings);
        if (candidates.empty() || candidates.front().score <= 1.0) break;

        bool applied = false;
        for (const auto& cand : candidates) {
            if (cand.score <= 1.0) break;
            // Pivot: strongest remaining entry in the same column.
            int pivot = -1;
            double best = 0.0;
            for (Eigen::Index k = 0; k < state.rfbn.entries.rows(); ++k) {
                if (static_cast<int>(k) == cand.row) continue;
                const double a = std::abs(state.rfbn.entries(k, cand.col));
                if (a > best) { best = a; pivot = static_cast<int>(k); }
            }
            if (pivot < 0 || best < kActiveTol) continue;

            const cplx f = state.rfbn.entries(pivot, cand.col);
            const cplx g = state.rfbn.entries(cand.row, cand.col);
            const double r = std::sqrt(std::norm(f) + std::norm(g));
            GivensRotation rot;
            rot.row_i = cand.row;
            rot.row_k = pivot;
            rot.c = std::abs(f) / r;
            rot.s = (f / std::abs(f)) * std::conj(g) / r;

            RfbnMatrix trial = state.rfbn;
            apply_givens(trial.entries, rot);
            trial.entries(cand.row, cand.col) = 0.0;  // exact zero by construction

            DbfBank trial_bank;
            bool acceptable = true;
            for (std::size_t d = 0; d < state.dbf_bank.entries.size(); ++d) {
                auto [dbf, report] = reopt(trial, state.dbf_bank.entries[d].tilt_deg);
                if (dbf.weights.size() != trial.entries.cols())
                    throw std::invalid_argument(
                        "givens_sparsify: callback returned a mis-sized DBF vector");
                const double viol = mask_violation(report);
                if (!report.converged && viol > baseline_violation[d] + 1e-9) {
                    acceptable = false;
                    break;
                }
                trial_bank.entries.push_back(std::move(dbf));
            }
            if (!acceptable) continue;  // roll back this rotation, try next candidate

            state.rfbn = std::move(trial);
            state.dbf_bank = std::move(trial_bank);
            state.rotations.push_back(rot);
            applied = true;
            break;
        }
        if (!applied) break;
    }
    return state;
}

namespace {

struct LeafRef {
    int row = -1;           // antenna index
    double power = 0.0;     // |w|^2
    double phase_rad = 0.0; // arg(w)
    int line = -1;          // current carrying line
};

// Left-balanced splitter tree; returns per-level divider specs.
void build_split_tree(std::vector<LeafRef>& leaves, int lo, int hi, int level, int in_line,
                      std::vector<std::vector<DividerRecord>>& levels, int& next_line) {
    const int n = hi - lo;
    if (n == 1) {
        leaves[static_cast<std::size_t>(lo)].line = in_line;
        return;
    }
    const int left_n = (n + 1) / 2;
    double p_left = 0.0, p_total = 0.0;
    for (int k = lo; k < hi; ++k) {
        p_total += leaves[static_cast<std::size_t>(k)].power;
        if (k < lo + left_n) p_left += leaves[static_cast<std::size_t>(k)].power;
    }
    double ratio = p_left / p_total;
    ratio = std::clamp(ratio, 1e-6, 1.0 - 1e-6);
    if (static_cast<int>(levels.size()) <= level) levels.emplace_back();
    const int out_a = next_line++;
    const int out_b = next_line++;
    levels[static_cast<std::size_t>(level)].push_back(DividerRecord{in_line, out_a, out_b, ratio});
    build_split_tree(leaves, lo, lo + left_n, level + 1, out_a, levels, next_line);
    build_split_tree(leaves, lo + left_n, hi, level + 1, out_b, levels, next_line);
}

}  // namespace

MicrowaveNetwork factorize_network(const RfbnMatrix& rfbn, CombinerStyle style) {
    const Eigen::MatrixXcd& w = rfbn.entries;
    const int n_t = static_cast<int>(w.rows());
    const int n_trx = static_cast<int>(w.cols());
    if (!w.allFinite()) throw std::invalid_argument("factorize_network: non-finite entries");

    // [C5]: at most 3 stages of each bank kind limits fan counts to 8.
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        int nz = 0;
        for (Eigen::Index i = 0; i < w.rows(); ++i) nz += std::abs(w(i, j)) > kActiveTol;
        if (nz == 0)
            throw std::invalid_argument("factorize_network: column " + std::to_string(j) +
                                        " has no connections");
        if (nz > 8)
            throw std::invalid_argument(
                "factorize_network: column fan-out needs more than 3 divider stages ([C5])");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        int nz = 0;
        for (Eigen::Index j = 0; j < w.cols(); ++j) nz += std::abs(w(i, j)) > kActiveTol;
        if (nz > 8)
            throw std::invalid_argument(
                "factorize_network: row-weight needs more than 3 combiner stages ([C5])");
    }

    MicrowaveNetwork net;
    net.n_trx = n_trx;
    net.n_antennas = n_t;
    int next_line = n_trx;

    // Splitter trees per transceiver column.
    std::vector<std::vector<DividerRecord>> divider_levels;
    std::vector<std::vector<LeafRef>> column_leaves(static_cast<std::size_t>(n_trx));
    for (int j = 0; j < n_trx; ++j) {
        auto& leaves = column_leaves[static_cast<std::size_t>(j)];
        for (int i = 0; i < n_t; ++i) {
            if (std::abs(w(i, j)) <= kActiveTol) continue;
            leaves.push_back(LeafRef{i, std::norm(w(i, j)), std::arg(w(i, j)), -1});
        }
        build_split_tree(leaves, 0, static_cast<int>(leaves.size()), 0, j, divider_levels,
                         next_line);
    }
    for (auto& level : divider_levels)
        net.stages.push_back(NetworkStage{StageKind::DividerBank, std::move(level), {}, {}});

    // Phase plane: one line per path, phase = arg(w).
    NetworkStage phase_stage{StageKind::PhaseBank, {}, {}, {}};
    std::vector<std::vector<std::pair<int, double>>> row_inputs(
        static_cast<std::size_t>(n_t));  // (line, design power) per antenna
    for (int j = 0; j < n_trx; ++j) {
        for (auto& leaf : column_leaves[static_cast<std::size_t>(j)]) {
            const int out = next_line++;
            phase_stage.phases.push_back(PhaseRecord{leaf.line, out, leaf.phase_rad});
            row_inputs[static_cast<std::size_t>(leaf.row)].push_back({out, leaf.power});
        }
    }
    net.stages.push_back(std::move(phase_stage));

    // Combiner trees per antenna row.  The final coupler of each row feeds
    // the antenna; with the Claim-2 style those are ratio-matched rat-races
    // whose isolation ports are paired k <-> K+1-k in one extra stage.
    net.antenna_ports.assign(static_cast<std::size_t>(n_t), -1);
    std::vector<std::vector<CombinerRecord>> combiner_levels;
    struct FinalCoupler {
        int stage_level;
        std::size_t index_in_level;
    };
    std::vector<FinalCoupler> finals;  // per weight>=2 antenna, ascending row order

    for (int i = 0; i < n_t; ++i) {
        auto inputs = row_inputs[static_cast<std::size_t>(i)];
        if (inputs.empty())
            throw std::invalid_argument("factorize_network: antenna " + std::to_string(i) +
                                        " is unfed");
        int level = 0;
        while (inputs.size() > 1) {
            std::vector<std::pair<int, double>> next;
            for (std::size_t k = 0; k + 1 < inputs.size(); k += 2) {
                const double pa = inputs[k].second, pb = inputs[k + 1].second;
                CombinerRecord c;
                c.port_in_a = inputs[k].first;
                c.port_in_b = inputs[k + 1].first;
                c.port_out = next_line++;
                c.kind = (style == CombinerStyle::Claim2RatRace) ? CombinerKind::RatRace4Port
                                                                 : CombinerKind::Wilkinson3Port;
                c.ratio = (style == CombinerStyle::Claim2RatRace)
                              ? std::clamp(pb / (pa + pb), 1e-6, 1.0 - 1e-6)
                              : 0.5;
                if (static_cast<int>(combiner_levels.size()) <= level)
                    combiner_levels.emplace_back();
                combiner_levels[static_cast<std::size_t>(level)].push_back(c);
                const bool is_final = (inputs.size() == 2);
                if (is_final && style == CombinerStyle::Claim2RatRace)
                    finals.push_back(
                        {level, combiner_levels[static_cast<std::size_t>(level)].size() - 1});
                next.push_back({c.port_out, pa + pb});
            }
            if (inputs.size() % 2 == 1) next.push_back(inputs.back());
            inputs = std::move(next);
            ++level;
        }
        net.antenna_ports[static_cast<std::size_t>(i)] = inputs.front().first;
    }

    // Claim-2 isolation pairing, provided the stage budget allows it.
    std::vector<CombinerRecord> pairing_stage;
    if (style == CombinerStyle::Claim2RatRace && !finals.empty() &&
        static_cast<int>(combiner_levels.size()) + 1 <= 3) {
        const std::size_t n_final = finals.size();
        std::vector<int> iso_lines(n_final, -1);
        for (std::size_t k = 0; k < n_final; ++k) {
            const std::size_t mate = n_final - 1 - k;
            if (mate == k) continue;  // odd middle coupler stays unpaired
            auto& rec = combiner_levels[static_cast<std::size_t>(finals[k].stage_level)]
                                       [finals[k].index_in_level];
            rec.iso_port = next_line++;
            iso_lines[k] = rec.iso_port;
        }
        for (std::size_t k = 0; k < n_final / 2; ++k) {
            const std::size_t mate = n_final - 1 - k;
            CombinerRecord c;
            c.port_in_a = iso_lines[k];
            c.port_in_b = iso_lines[mate];
            c.port_out = next_line++;  // recovered mismatch power, terminated
            c.kind = CombinerKind::RatRace4Port;
            c.ratio = 0.5;
            pairing_stage.push_back(c);
        }
    }

    for (auto& level : combiner_levels)
        net.stages.push_back(NetworkStage{StageKind::CombinerBank, {}, {}, std::move(level)});
    if (!pairing_stage.empty())
        net.stages.push_back(NetworkStage{StageKind::CombinerBank, {}, {}, std::move(pairing_stage)});

    net.n_lines = next_line;
    net.validate();
    return net;
}

ClaimReport verify_claims(const MicrowaveNetwork& network, const DbfBank& dbf_bank) {
    ClaimReport report;
    report.combiner_bound = network.n_trx - 1;
    report.claim1_ok = true;
    for (const auto& stage : network.stages) {
        if (stage.kind != StageKind::CombinerBank) continue;
        report.per_stage_combiner_count.push_back(static_cast<int>(stage.combiners.size()));
        if (static_cast<int>(stage.combiners.size()) > report.combiner_bound)
            report.claim1_ok = false;
    }
    // Unpaired couplers: antenna-feeding rat-races with a terminated
    // isolation port (no k <-> N_trx-k mate).
    int combiner_id = 0;
    for (const auto& stage : network.stages) {
        if (stage.kind != StageKind::CombinerBank) continue;
        for (const auto& c : stage.combiners) {
            const bool feeds_antenna =
                std::find(network.antenna_ports.begin(), network.antenna_ports.end(),
                          c.port_out) != network.antenna_ports.end();
            if (feeds_antenna && c.kind == CombinerKind::RatRace4Port && c.iso_port < 0)
                report.unpaired_couplers.push_back(combiner_id);
            ++combiner_id;
        }
    }

    for (const auto& dbf : dbf_bank.entries) {
        const PropagationResult res =
            propagate(network, dbf.weights, PropagationModel::IdealAdder);
        const Eigen::VectorXcd x = antenna_vector(res);
        const double x_max = x.cwiseAbs().maxCoeff();

        // Linear-phase deviation across live antenna ports.
        std::vector<double> ks, phases;
        double prev = 0.0;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            if (std::abs(x[k]) < 1e-6 * x_max) continue;
            double ph = std::arg(x[k]);
            if (!ks.empty()) ph = prev + wrap_pi(ph - prev);
            ks.push_back(static_cast<double>(k));
            phases.push_back(ph);
            prev = ph;
        }
        double max_dev = 0.0;
        if (ks.size() >= 3) {
            const auto n = static_cast<double>(ks.size());
            double sk = 0, sp = 0, skk = 0, skp = 0;
            for (std::size_t t = 0; t < ks.size(); ++t) {
                sk += ks[t]; sp += phases[t];
                skk += ks[t] * ks[t]; skp += ks[t] * phases[t];
            }
            const double slope = (n * skp - sk * sp) / (n * skk - sk * sk);
            const double icept = (sp - slope * sk) / n;
            for (std::size_t t = 0; t < ks.size(); ++t)
                max_dev = std::max(max_dev,
                                   std::abs(phases[t] - (slope * ks[t] + icept)) * kRadToDeg);
        }
        report.per_tilt_linear_phase_dev_deg.push_back(max_dev);

        double asym = 0.0;
        for (Eigen::Index k = 0; k < x.size() / 2; ++k) {
            const double a = std::abs(x[k]);
            const double b = std::abs(x[x.size() - 1 - k]);
            if (a < 1e-6 * x_max || b < 1e-6 * x_max) continue;
            asym = std::max(asym, std::abs(20.0 * std::log10(a / b)));
        }
        report.per_tilt_magnitude_asymmetry_db.push_back(asym);
    }
    return report;
}

}  // namespace hybridbf
