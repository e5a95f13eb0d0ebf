#include "hybridbf/microwave_sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hybridbf {

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrap_pi(double r) {
    while (r > std::numbers::pi) r -= 2.0 * std::numbers::pi;
    while (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}
}  // namespace

PortSignal PortSignal::from_complex(cplx v) {
    PortSignal s;
    s.amplitude = std::abs(v);
    s.phase_rad = (s.amplitude > 0.0) ? wrap_pi(std::arg(v)) : 0.0;
    return s;
}

PropagationResult propagate(const MicrowaveNetwork& network,
                            const std::vector<PortSignal>& excitation, PropagationModel model,
                            double per_component_loss_db) {
    Eigen::VectorXcd exc(static_cast<Eigen::Index>(excitation.size()));
    for (std::size_t i = 0; i < excitation.size(); ++i)
        exc[static_cast<Eigen::Index>(i)] = excitation[i].to_complex();
    return propagate(network, exc, model, per_component_loss_db);
}

PropagationResult propagate(const MicrowaveNetwork& network, const Eigen::VectorXcd& excitation,
                            PropagationModel model, double per_component_loss_db) {
    network.validate();
    if (excitation.size() != network.n_trx)
        throw std::invalid_argument("propagate: excitation length must equal transceiver count");
    const double atten = std::pow(10.0, -per_component_loss_db / 20.0);
    const bool ideal = (model == PropagationModel::IdealAdder);

    std::vector<cplx> line(static_cast<std::size_t>(network.n_lines), cplx(0.0, 0.0));
    std::vector<bool> live(static_cast<std::size_t>(network.n_lines), false);
    for (int p = 0; p < network.n_trx; ++p) {
        line[static_cast<std::size_t>(p)] = excitation[p];
        live[static_cast<std::size_t>(p)] = true;
    }

    PropagationResult result;
    result.total_input_power = excitation.squaredNorm();
    double dissipated = 0.0;
    int combiner_id = 0;

    auto take = [&](int id) {
        live[static_cast<std::size_t>(id)] = false;
        return line[static_cast<std::size_t>(id)];
    };
    auto put = [&](int id, cplx v) {
        line[static_cast<std::size_t>(id)] = v;
        live[static_cast<std::size_t>(id)] = true;
    };

    for (std::size_t si = 0; si < network.stages.size(); ++si) {
        const auto& stage = network.stages[si];
        for (const auto& d : stage.dividers) {
            const cplx s = take(d.port_in);
            const cplx a = std::sqrt(d.ratio) * s * atten;
            const cplx b = std::sqrt(1.0 - d.ratio) * s * atten;
            dissipated += std::norm(s) - std::norm(a) - std::norm(b);
            put(d.port_out_a, a);
            put(d.port_out_b, b);
        }
        for (const auto& p : stage.phases) {
            const cplx s = take(p.port_in);
            const cplx o = s * std::polar(atten, p.phase_rad);
            dissipated += std::norm(s) - std::norm(o);
            put(p.port_out, o);
        }
        for (const auto& c : stage.combiners) {
            const cplx sa = take(c.port_in_a);
            const cplx sb = take(c.port_in_b);
            CombinerDissipation rec;
            rec.combiner_id = combiner_id++;
            rec.stage_index = static_cast<int>(si);
            rec.input_power = std::norm(sa) + std::norm(sb);
            for (int ant : network.antenna_ports)
                if (ant == c.port_out) rec.feeds_antenna = true;
            if (std::abs(sa) > 0.0 && std::abs(sb) > 0.0)
                rec.input_phase_diff_rad = std::abs(wrap_pi(std::arg(sa) - std::arg(sb)));

            cplx sum, iso;
            if (ideal) {
                sum = sa + sb;
                iso = cplx(0.0, 0.0);
            } else {
                const double ca = std::sqrt(1.0 - c.ratio);
                const double cb = std::sqrt(c.ratio);
                sum = (ca * sa + cb * sb) * atten;
                iso = (cb * sa - ca * sb) * atten;
                dissipated += (std::norm(sa) + std::norm(sb)) * (1.0 - atten * atten);
            }
            rec.sum_power = std::norm(sum);
            rec.iso_power = std::norm(iso);
            put(c.port_out, sum);
            if (!ideal) {
                if (c.kind == CombinerKind::Wilkinson3Port) {
                    dissipated += std::norm(iso);  // isolation resistor
                    rec.watts = std::norm(iso);
                } else if (c.iso_port >= 0) {
                    put(c.iso_port, iso);  // recirculated downstream
                } else {
                    dissipated += std::norm(iso);  // terminated isolation port
                    rec.watts = std::norm(iso);
                }
            }
            result.per_combiner.push_back(rec);
        }
    }

    result.antenna_signals.resize(static_cast<std::size_t>(network.n_antennas));
    double radiated = 0.0;
    for (int i = 0; i < network.n_antennas; ++i) {
        const int port = network.antenna_ports[static_cast<std::size_t>(i)];
        const cplx v = take(port);
        result.antenna_signals[static_cast<std::size_t>(i)] = PortSignal::from_complex(v);
        radiated += std::norm(v);
    }
    // Any live line that is not an antenna port ends in a termination.
    for (std::size_t l = 0; l < live.size(); ++l)
        if (live[l]) dissipated += std::norm(line[l]);

    result.total_radiated_power = radiated;
    result.total_dissipated_power = dissipated;
    return result;
}

Eigen::VectorXcd antenna_vector(const PropagationResult& result) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(result.antenna_signals.size()));
    for (std::size_t i = 0; i < result.antenna_signals.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = result.antenna_signals[i].to_complex();
    return v;
}

double insertion_loss_db(const PropagationResult& result) {
    if (result.total_radiated_power <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(result.total_input_power / result.total_radiated_power);
}

MismatchProfile mismatch_profile(const MicrowaveNetwork& network, const DbfBank& dbf_bank,
                                 double per_component_loss_db) {
    if (dbf_bank.entries.empty())
        throw std::invalid_argument("mismatch_profile: empty DBF bank");
    MismatchProfile profile;
    for (const auto& dbf : dbf_bank.entries) {
        const PropagationResult res =
            propagate(network, dbf.weights, PropagationModel::Physical, per_component_loss_db);
        double acc = 0.0;
        int count = 0;
        for (const auto& rec : res.per_combiner) {
            if (!rec.feeds_antenna || rec.input_power <= 0.0) continue;
            acc += rec.input_phase_diff_rad * kRadToDeg;
            ++count;
        }
        profile.tilt_deg.push_back(dbf.tilt_deg);
        profile.avg_mismatch_deg.push_back(count > 0 ? acc / count : 0.0);
        profile.insertion_loss_db.push_back(insertion_loss_db(res));
    }
    return profile;
}

}  // namespace hybridbf
