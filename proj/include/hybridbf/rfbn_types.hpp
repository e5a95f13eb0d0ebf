#ifndef HYBRIDBF_RFBN_TYPES_HPP
#define HYBRIDBF_RFBN_TYPES_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hybridbf {

// Boolean sparsity pattern restricting which transceivers feed which
// antennas (the interconnect map S).
struct InterconnectMask {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support;  // N_t x N_trx

    InterconnectMask() = default;
    explicit InterconnectMask(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> s)
        : support(std::move(s)) {
        for (Eigen::Index j = 0; j < support.cols(); ++j)
            if (!support.col(j).any())
                throw std::invalid_argument("InterconnectMask: empty column " + std::to_string(j));
        for (Eigen::Index i = 0; i < support.rows(); ++i)
            if (!support.row(i).any())
                throw std::invalid_argument("InterconnectMask: empty row " + std::to_string(i));
    }

    // Build from per-column runs of ones: (first_row, length) pairs.
    static InterconnectMask from_column_runs(int n_rows,
                                             const std::vector<std::pair<int, int>>& runs);

    int row_weight(Eigen::Index i) const {
        int w = 0;
        for (Eigen::Index j = 0; j < support.cols(); ++j) w += support(i, j) ? 1 : 0;
        return w;
    }
    int max_row_weight() const {
        int w = 0;
        for (Eigen::Index i = 0; i < support.rows(); ++i) w = std::max(w, row_weight(i));
        return w;
    }
};

// The RFBN matrix W with its optional interconnect mask.  Columns are kept
// at unit Frobenius norm; entries vanish outside the mask support.
struct RfbnMatrix {
    Eigen::MatrixXcd entries;  // N_t x N_trx
    std::optional<InterconnectMask> mask;

    int n_antennas() const { return static_cast<int>(entries.rows()); }
    int n_transceivers() const { return static_cast<int>(entries.cols()); }

    void normalize_columns() {
        for (Eigen::Index j = 0; j < entries.cols(); ++j) {
            const double nrm = entries.col(j).norm();
            if (nrm > 0.0) entries.col(j) /= nrm;
        }
    }
    void apply_mask() {
        if (!mask.has_value()) return;
        for (Eigen::Index i = 0; i < entries.rows(); ++i)
            for (Eigen::Index j = 0; j < entries.cols(); ++j)
                if (!mask->support(i, j)) entries(i, j) = 0.0;
    }
};

// Canonical per-column phases: align each column with an earlier column at
// the first shared support row, so a flat excitation is phase-coherent at
// every combiner.  Returns the applied unit phasors (gauge factors); global
// column phases are absorbed by the DBF.
inline Eigen::VectorXcd align_column_phases(Eigen::MatrixXcd& w, double active_tol = 1e-9) {
    Eigen::VectorXcd gauge = Eigen::VectorXcd::Ones(w.cols());
    for (Eigen::Index j = 1; j < w.cols(); ++j) {
        bool done = false;
        for (Eigen::Index i = 0; i < w.rows() && !done; ++i) {
            if (std::abs(w(i, j)) < active_tol) continue;
            for (Eigen::Index jp = 0; jp < j && !done; ++jp) {
                if (std::abs(w(i, jp)) < active_tol) continue;
                const double delta = std::arg(w(i, jp)) - std::arg(w(i, j));
                gauge[j] = std::polar(1.0, delta);
                w.col(j) *= gauge[j];
                done = true;
            }
        }
    }
    return gauge;
}

}  // namespace hybridbf

#endif
