#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hybridbf/microwave_sim.hpp"
#include "hybridbf/rfbn_factorizer.hpp"

using namespace hybridbf;

namespace {

// Minimal two-input one-antenna combiner network.
MicrowaveNetwork tiny_combiner(CombinerKind kind, double ratio, int iso_port) {
    MicrowaveNetwork net;
    net.n_trx = 2;
    net.n_antennas = 1;
    net.n_lines = (iso_port >= 0) ? 4 : 3;
    NetworkStage stage{StageKind::CombinerBank, {}, {}, {}};
    stage.combiners.push_back(CombinerRecord{0, 1, 2, kind, ratio, iso_port});
    net.stages.push_back(std::move(stage));
    net.antenna_ports = {2};
    return net;
}

Eigen::MatrixXcd random_sparse_w(std::mt19937_64& rng, int n_t, int n_trx) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick_row(0, n_t - 1);
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n_t, n_trx);
    for (int j = 0; j < n_trx; ++j) {
        const int fan = 1 + static_cast<int>(rng() % 5);
        for (int f = 0; f < fan; ++f) w(pick_row(rng), j) = cplx(normal(rng), normal(rng));
        if (w.col(j).norm() == 0.0) w(pick_row(rng), j) = 1.0;
        w.col(j) /= w.col(j).norm();
    }
    for (int i = 0; i < n_t; ++i)
        if (w.row(i).norm() == 0.0) w(i, rng() % n_trx) = 0.3;
    return w;
}

}  // namespace

TEST_CASE("matched Wilkinson combining is lossless") {
    const auto net = tiny_combiner(CombinerKind::Wilkinson3Port, 0.5, -1);
    Eigen::VectorXcd excitation(2);
    excitation << cplx(0.5, 0.2), cplx(0.5, 0.2);
    const auto res = propagate(net, excitation);
    CHECK(res.total_dissipated_power < 1e-15);
    CHECK(res.total_radiated_power ==
          doctest::Approx(res.total_input_power).epsilon(1e-12));
    CHECK(insertion_loss_db(res) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("antiphase Wilkinson combining dissipates everything") {
    const auto net = tiny_combiner(CombinerKind::Wilkinson3Port, 0.5, -1);
    Eigen::VectorXcd excitation(2);
    excitation << cplx(0.7, 0.0), cplx(-0.7, 0.0);
    const auto res = propagate(net, excitation);
    CHECK(res.total_radiated_power < 1e-15);
    CHECK(res.total_dissipated_power ==
          doctest::Approx(res.total_input_power).epsilon(1e-12));
    CHECK(std::isinf(insertion_loss_db(res)));
}

TEST_CASE("rat-race ports satisfy exact unitarity") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uratio(0.05, 0.95);
    for (int trial = 0; trial < 200; ++trial) {
        const double ratio = uratio(rng);
        const auto net = tiny_combiner(CombinerKind::RatRace4Port, ratio, 3);
        Eigen::VectorXcd excitation(2);
        excitation << cplx(normal(rng), normal(rng)), cplx(normal(rng), normal(rng));
        const auto res = propagate(net, excitation);
        REQUIRE(res.per_combiner.size() == 1);
        const auto& rec = res.per_combiner[0];
        CHECK(std::abs(rec.sum_power + rec.iso_power - rec.input_power) < 1e-12);
        // The routed isolation line is terminated here and counted dissipated.
        CHECK(std::abs(res.total_input_power - res.total_radiated_power -
                       res.total_dissipated_power) < 1e-12);
    }
}

TEST_CASE("propagation is linear in the excitation") {
    std::mt19937_64 rng(32);
    const Eigen::MatrixXcd w = random_sparse_w(rng, 6, 3);
    RfbnMatrix rfbn;
    rfbn.entries = w;
    const auto net = factorize_network(rfbn);
    Eigen::VectorXcd excitation(3);
    excitation << cplx(0.3, -0.1), cplx(-0.2, 0.5), cplx(0.1, 0.1);
    const cplx alpha(1.7, -0.4);
    const auto r1 = propagate(net, excitation);
    const auto r2 = propagate(net, (alpha * excitation).eval());
    for (int i = 0; i < 6; ++i) {
        const cplx a = r1.antenna_signals[i].to_complex() * alpha;
        const cplx b = r2.antenna_signals[i].to_complex();
        CHECK(std::abs(a - b) < 1e-12);
    }
    CHECK(r2.total_dissipated_power ==
          doctest::Approx(std::norm(alpha) * r1.total_dissipated_power).epsilon(1e-9));
}

TEST_CASE("energy ledger closes on randomized networks and excitations") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_t = 3 + static_cast<int>(rng() % 8);
        const int n_trx = 2 + static_cast<int>(rng() % 3);
        const Eigen::MatrixXcd w = random_sparse_w(rng, n_t, n_trx);
        RfbnMatrix rfbn;
        rfbn.entries = w;
        const auto style = (trial % 2 == 0) ? CombinerStyle::Claim2RatRace
                                            : CombinerStyle::BlassWilkinson;
        const auto net = factorize_network(rfbn, style);
        Eigen::VectorXcd excitation(n_trx);
        for (int k = 0; k < n_trx; ++k) excitation[k] = cplx(normal(rng), normal(rng));
        const auto res = propagate(net, excitation);
        CHECK(std::abs(res.total_input_power - res.total_radiated_power -
                       res.total_dissipated_power) <
              1e-9 * std::max(1.0, res.total_input_power));
    }
}

TEST_CASE("per-component attenuation keeps the ledger consistent") {
    std::mt19937_64 rng(34);
    const Eigen::MatrixXcd w = random_sparse_w(rng, 8, 3);
    RfbnMatrix rfbn;
    rfbn.entries = w;
    const auto net = factorize_network(rfbn);
    Eigen::VectorXcd excitation = Eigen::VectorXcd::Ones(3) / std::sqrt(3.0);
    const auto lossless = propagate(net, excitation, PropagationModel::Physical, 0.0);
    const auto lossy = propagate(net, excitation, PropagationModel::Physical, 0.15);
    CHECK(lossy.total_radiated_power < lossless.total_radiated_power);
    CHECK(std::abs(lossy.total_input_power - lossy.total_radiated_power -
                   lossy.total_dissipated_power) < 1e-9);
}

TEST_CASE("propagate validates port counts and the network structure") {
    const auto net = tiny_combiner(CombinerKind::Wilkinson3Port, 0.5, -1);
    CHECK_THROWS_AS(propagate(net, Eigen::VectorXcd::Ones(3)), std::invalid_argument);

    MicrowaveNetwork cyclic = net;
    cyclic.stages[0].combiners[0].port_in_b = 2;  // consumes its own output line
    cyclic.stages[0].combiners[0].port_out = 1;
    CHECK_THROWS(propagate(cyclic, Eigen::VectorXcd::Ones(2)));
}

TEST_CASE("network text serialization round-trips") {
    std::mt19937_64 rng(35);
    const Eigen::MatrixXcd w = random_sparse_w(rng, 7, 3);
    RfbnMatrix rfbn;
    rfbn.entries = w;
    const auto net = factorize_network(rfbn);
    const std::string text = serialize_network(net);
    const auto parsed = parse_network(text);
    CHECK(serialize_network(parsed) == text);

    Eigen::VectorXcd excitation(3);
    excitation << cplx(0.2, 0.1), cplx(-0.4, 0.3), cplx(0.5, -0.2);
    const auto r1 = propagate(net, excitation);
    const auto r2 = propagate(parsed, excitation);
    CHECK(std::abs(r1.total_radiated_power - r2.total_radiated_power) < 1e-15);

    CHECK_THROWS(parse_network("bogus"));
    CHECK_THROWS(parse_network("hybridbf-network v1\nrecord stage_kind=divider"));
}

TEST_CASE("mismatch profile reports finite non-negative losses") {
    std::mt19937_64 rng(36);
    const Eigen::MatrixXcd w = random_sparse_w(rng, 8, 3);
    RfbnMatrix rfbn;
    rfbn.entries = w;
    const auto net = factorize_network(rfbn);
    DbfBank bank;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int d = 0; d < 4; ++d) {
        DbfWeights dbf;
        dbf.tilt_deg = 82.0 + 2.0 * d;
        dbf.weights.resize(3);
        for (int k = 0; k < 3; ++k) dbf.weights[k] = cplx(normal(rng), normal(rng));
        dbf.weights /= dbf.weights.norm();
        bank.entries.push_back(std::move(dbf));
    }
    const auto profile = mismatch_profile(net, bank);
    REQUIRE(profile.tilt_deg.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(profile.insertion_loss_db[i] >= 0.0);
        CHECK(std::isfinite(profile.insertion_loss_db[i]));
        CHECK(profile.avg_mismatch_deg[i] >= 0.0);
    }
}

TEST_CASE("port signals wrap phases into (-pi, pi]") {
    const PortSignal s = PortSignal::from_complex(std::polar(2.0, 5.0));
    CHECK(s.amplitude == doctest::Approx(2.0));
    CHECK(s.phase_rad > -std::numbers::pi);
    CHECK(s.phase_rad <= std::numbers::pi);
    CHECK(std::abs(s.to_complex() - std::polar(2.0, 5.0)) < 1e-12);
}
