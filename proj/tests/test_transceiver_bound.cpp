#include <doctest.h>

#include <cmath>
#include <random>

#include "hybridbf/transceiver_bound.hpp"

using namespace hybridbf;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cplx(normal(rng), normal(rng));
    return m;
}

TiltMatrix as_tilt_matrix(const Eigen::MatrixXcd& m) {
    TiltMatrix t;
    t.columns = m;
    for (int j = 0; j < m.cols(); ++j) t.tilts_deg.push_back(80.0 + j);
    return t;
}

std::vector<FullAaaWeights> make_refs(const Eigen::MatrixXcd& m) {
    std::vector<FullAaaWeights> refs;
    for (int j = 0; j < m.cols(); ++j) {
        FullAaaWeights r;
        r.tilt_deg = 80.0 + j;
        r.weights = m.col(j);
        refs.push_back(std::move(r));
    }
    return refs;
}

}  // namespace

TEST_CASE("stack_tilts orders columns by ascending tilt") {
    Eigen::MatrixXcd m = random_matrix(5, 3, 1);
    auto refs = make_refs(m);
    std::swap(refs[0], refs[2]);  // scramble
    const auto theta = stack_tilts(refs);
    CHECK(theta.tilts_deg.size() == 3);
    CHECK((theta.columns.col(0) - m.col(0)).norm() < 1e-15);
    CHECK((theta.columns.col(2) - m.col(2)).norm() < 1e-15);
}

TEST_CASE("stack_tilts rejects duplicates and mismatched lengths") {
    Eigen::MatrixXcd m = random_matrix(5, 2, 2);
    auto refs = make_refs(m);
    refs[1].tilt_deg = refs[0].tilt_deg;
    CHECK_THROWS_AS(stack_tilts(refs), std::invalid_argument);

    refs = make_refs(m);
    refs[1].weights = Eigen::VectorXcd::Ones(4);
    CHECK_THROWS_AS(stack_tilts(refs), std::invalid_argument);

    // Single tilt: an N_t x 1 matrix.
    refs = make_refs(m.leftCols(1));
    const auto theta = stack_tilts(refs);
    CHECK(theta.columns.rows() == 5);
    CHECK(theta.columns.cols() == 1);
}

TEST_CASE("rank-1 tilt matrix needs one transceiver at any threshold") {
    Eigen::VectorXcd v = random_matrix(6, 1, 3);
    Eigen::MatrixXcd m(6, 4);
    for (int j = 0; j < 4; ++j) m.col(j) = v * cplx(1.0 + j, 0.5 * j);
    for (double thr : {0.5, 0.9, 0.999}) {
        const auto bound = min_transceivers(as_tilt_matrix(m), thr);
        CHECK(bound.n_trx_min == 1);
    }
}

TEST_CASE("min_transceivers is monotone in the energy threshold") {
    const auto theta = as_tilt_matrix(random_matrix(8, 6, 4));
    int prev = 0;
    for (double thr : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999}) {
        const auto bound = min_transceivers(theta, thr);
        CHECK(bound.n_trx_min >= prev);
        prev = bound.n_trx_min;
    }
}

TEST_CASE("left singular vectors are orthonormal and truncation matches Eckart-Young") {
    const Eigen::MatrixXcd m = random_matrix(8, 4, 5);
    const auto bound = min_transceivers(as_tilt_matrix(m), 0.9);
    CHECK((bound.left_vectors.adjoint() * bound.left_vectors -
           Eigen::MatrixXcd::Identity(4, 4))
              .norm() < 1e-10);

    // Rank-2 truncation residual equals sqrt(sigma_3^2 + sigma_4^2).
    const auto w2 = dominant_basis(bound, 2).entries;
    const double residual = (m - w2 * (w2.adjoint() * m)).norm();
    const double expected = std::sqrt(std::pow(bound.singular_values[2], 2) +
                                      std::pow(bound.singular_values[3], 2));
    CHECK(residual == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("projection residual identity holds for every rank") {
    const Eigen::MatrixXcd m = random_matrix(7, 5, 6);
    const auto bound = min_transceivers(as_tilt_matrix(m), 0.9);
    for (int r = 1; r <= 5; ++r) {
        const auto wr = dominant_basis(bound, r).entries;
        double tail = 0.0;
        for (int k = r; k < bound.singular_values.size(); ++k)
            tail += bound.singular_values[k] * bound.singular_values[k];
        const double residual2 = (m - wr * (wr.adjoint() * m)).squaredNorm();
        CHECK(residual2 == doctest::Approx(tail).epsilon(1e-9));
    }
}

TEST_CASE("permuting tilt order leaves singular values unchanged") {
    Eigen::MatrixXcd m = random_matrix(6, 4, 7);
    const auto b1 = min_transceivers(as_tilt_matrix(m), 0.9);
    Eigen::MatrixXcd perm(6, 4);
    perm << m.col(2), m.col(0), m.col(3), m.col(1);
    const auto b2 = min_transceivers(as_tilt_matrix(perm), 0.9);
    CHECK((b1.singular_values - b2.singular_values).norm() < 1e-10);
}

TEST_CASE("full-rank projection reproduces the matrix") {
    const Eigen::MatrixXcd m = random_matrix(6, 3, 8);
    const auto bound = min_transceivers(as_tilt_matrix(m), 0.99);
    const auto w = dominant_basis(bound, 3).entries;
    CHECK((m - w * (w.adjoint() * m)).norm() < 1e-9);
}

TEST_CASE("rank-1 residual after a single dominant vector equals sigma_2") {
    Eigen::MatrixXcd m = random_matrix(5, 1, 9) * Eigen::RowVectorXcd::Ones(2);
    m.col(1) += 0.3 * random_matrix(5, 1, 10);
    const auto bound = min_transceivers(as_tilt_matrix(m), 0.5);
    const auto w1 = dominant_basis(bound, 1).entries;
    const double residual = (m - w1 * (w1.adjoint() * m)).norm();
    CHECK(residual == doctest::Approx(bound.singular_values[1]).epsilon(1e-9));
}

TEST_CASE("more tilts than antennas thins to the extreme tilts") {
    const Eigen::MatrixXcd m = random_matrix(4, 9, 11);
    const auto bound = min_transceivers(as_tilt_matrix(m), 0.95);
    CHECK(bound.singular_values.size() == 4);
    CHECK(bound.left_vectors.rows() == 4);
}

TEST_CASE("degenerate requests are rejected") {
    const Eigen::MatrixXcd m = random_matrix(5, 2, 12);
    CHECK_THROWS_AS(min_transceivers(as_tilt_matrix(m), 1.5), std::invalid_argument);
    CHECK_THROWS_AS(min_transceivers(as_tilt_matrix(Eigen::MatrixXcd::Zero(4, 2)), 0.9),
                    std::invalid_argument);
    const auto bound = min_transceivers(as_tilt_matrix(m), 0.9);
    CHECK_THROWS_AS(dominant_basis(bound, 3), std::invalid_argument);
    CHECK_THROWS_AS(dominant_basis(bound, 0), std::invalid_argument);
}
