#include "hybridbf/microwave_network.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hybridbf {

namespace {

const char* stage_kind_name(StageKind k) {
    switch (k) {
        case StageKind::DividerBank: return "divider_bank";
        case StageKind::PhaseBank: return "phase_bank";
        case StageKind::CombinerBank: return "combiner_bank";
    }
    return "?";
}

StageKind stage_kind_from(const std::string& s) {
    if (s == "divider_bank") return StageKind::DividerBank;
    if (s == "phase_bank") return StageKind::PhaseBank;
    if (s == "combiner_bank") return StageKind::CombinerBank;
    throw std::runtime_error("parse_network: unknown stage kind '" + s + "'");
}

}  // namespace

void MicrowaveNetwork::validate() const {
    if (n_trx < 1 || n_antennas < 1 || n_lines < n_trx)
        throw std::runtime_error("network: bad port counts");
    if (static_cast<int>(antenna_ports.size()) != n_antennas)
        throw std::runtime_error("network: antenna port list size mismatch");

    // 0 = unseen, 1 = produced, 2 = consumed.
    std::vector<int> state(static_cast<std::size_t>(n_lines), 0);
    for (int p = 0; p < n_trx; ++p) state[static_cast<std::size_t>(p)] = 1;

    auto produce = [&](int line) {
        if (line < 0 || line >= n_lines) throw std::runtime_error("network: line out of range");
        if (state[static_cast<std::size_t>(line)] != 0)
            throw std::runtime_error("network: line " + std::to_string(line) +
                                     " produced twice or out of order");
        state[static_cast<std::size_t>(line)] = 1;
    };
    auto consume = [&](int line) {
        if (line < 0 || line >= n_lines) throw std::runtime_error("network: line out of range");
        if (state[static_cast<std::size_t>(line)] != 1)
            throw std::runtime_error("network: line " + std::to_string(line) +
                                     " consumed before production (cyclic routing?)");
        state[static_cast<std::size_t>(line)] = 2;
    };

    int div_stages = 0, comb_stages = 0, phase_stages = 0;
    for (const auto& stage : stages) {
        switch (stage.kind) {
            case StageKind::DividerBank:
                ++div_stages;
                for (const auto& d : stage.dividers) {
                    if (!(d.ratio > 0.0 && d.ratio < 1.0))
                        throw std::runtime_error("network: divider ratio outside (0, 1)");
                    consume(d.port_in);
                    produce(d.port_out_a);
                    produce(d.port_out_b);
                }
                break;
            case StageKind::PhaseBank:
                ++phase_stages;
                for (const auto& p : stage.phases) {
                    consume(p.port_in);
                    produce(p.port_out);
                }
                break;
            case StageKind::CombinerBank:
                ++comb_stages;
                for (const auto& c : stage.combiners) {
                    if (!(c.ratio > 0.0 && c.ratio < 1.0))
                        throw std::runtime_error("network: combiner ratio outside (0, 1)");
                    if (c.iso_port >= 0 && c.kind != CombinerKind::RatRace4Port)
                        throw std::runtime_error(
                            "network: isolation routing requires a rat-race combiner");
                    consume(c.port_in_a);
                    consume(c.port_in_b);
                    produce(c.port_out);
                    if (c.iso_port >= 0) produce(c.iso_port);
                }
                break;
        }
    }
    if (div_stages > 3 || comb_stages > 3)
        throw std::runtime_error("network: more than 3 stages of one kind ([C5])");

    std::vector<bool> seen(static_cast<std::size_t>(n_lines), false);
    for (int a : antenna_ports) {
        if (a < 0 || a >= n_lines || state[static_cast<std::size_t>(a)] != 1)
            throw std::runtime_error("network: antenna port not driven by a live line");
        if (seen[static_cast<std::size_t>(a)])
            throw std::runtime_error("network: two antennas share one feed line");
        seen[static_cast<std::size_t>(a)] = true;
    }
}

int MicrowaveNetwork::combiner_stage_count() const {
    int n = 0;
    for (const auto& s : stages) n += (s.kind == StageKind::CombinerBank) ? 1 : 0;
    return n;
}

int MicrowaveNetwork::divider_stage_count() const {
    int n = 0;
    for (const auto& s : stages) n += (s.kind == StageKind::DividerBank) ? 1 : 0;
    return n;
}

std::string serialize_network(const MicrowaveNetwork& network) {
    std::ostringstream out;
    out.precision(17);
    out << "hybridbf-network v1\n";
    out << "n_trx " << network.n_trx << "\n";
    out << "n_antennas " << network.n_antennas << "\n";
    out << "n_lines " << network.n_lines << "\n";
    out << "antenna_ports";
    for (int a : network.antenna_ports) out << " " << a;
    out << "\n";
    for (const auto& stage : network.stages) {
        out << "stage " << stage_kind_name(stage.kind) << "\n";
        for (const auto& d : stage.dividers)
            out << "record stage_kind=divider ports_in=" << d.port_in << " ports_out="
                << d.port_out_a << "," << d.port_out_b << " ratio=" << d.ratio
                << " phase_rad=0 iso_route=-\n";
        for (const auto& p : stage.phases)
            out << "record stage_kind=phase ports_in=" << p.port_in << " ports_out="
                << p.port_out << " ratio=1 phase_rad=" << p.phase_rad << " iso_route=-\n";
        for (const auto& c : stage.combiners) {
            out << "record stage_kind="
                << (c.kind == CombinerKind::Wilkinson3Port ? "wilkinson" : "ratrace")
                << " ports_in=" << c.port_in_a << "," << c.port_in_b
                << " ports_out=" << c.port_out << " ratio=" << c.ratio << " phase_rad=0"
                << " iso_route=";
            if (c.iso_port >= 0) out << c.iso_port;
            else out << "-";
            out << "\n";
        }
    }
    return out.str();
}

MicrowaveNetwork parse_network(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "hybridbf-network v1")
        throw std::runtime_error("parse_network: bad header");

    MicrowaveNetwork net;
    auto split_fields = [](const std::string& record) {
        std::map<std::string, std::string> fields;
        std::istringstream rs(record);
        std::string tok;
        rs >> tok;  // "record"
        while (rs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("parse_network: malformed field '" + tok + "'");
            fields[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        return fields;
    };
    auto parse_ports = [](const std::string& s) {
        std::vector<int> ports;
        std::istringstream ps(s);
        std::string item;
        while (std::getline(ps, item, ',')) ports.push_back(std::stoi(item));
        return ports;
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "n_trx") ls >> net.n_trx;
        else if (key == "n_antennas") ls >> net.n_antennas;
        else if (key == "n_lines") ls >> net.n_lines;
        else if (key == "antenna_ports") {
            int a;
            while (ls >> a) net.antenna_ports.push_back(a);
        } else if (key == "stage") {
            std::string kind;
            ls >> kind;
            net.stages.push_back(NetworkStage{stage_kind_from(kind), {}, {}, {}});
        } else if (key == "record") {
            if (net.stages.empty()) throw std::runtime_error("parse_network: record before stage");
            auto fields = split_fields(line);
            const std::string kind = fields.at("stage_kind");
            const auto pin = parse_ports(fields.at("ports_in"));
            const auto pout = parse_ports(fields.at("ports_out"));
            auto& stage = net.stages.back();
            if (kind == "divider") {
                if (pin.size() != 1 || pout.size() != 2)
                    throw std::runtime_error("parse_network: divider port arity");
                stage.dividers.push_back(
                    DividerRecord{pin[0], pout[0], pout[1], std::stod(fields.at("ratio"))});
            } else if (kind == "phase") {
                if (pin.size() != 1 || pout.size() != 1)
                    throw std::runtime_error("parse_network: phase port arity");
                stage.phases.push_back(
                    PhaseRecord{pin[0], pout[0], std::stod(fields.at("phase_rad"))});
            } else if (kind == "wilkinson" || kind == "ratrace") {
                if (pin.size() != 2 || pout.size() != 1)
                    throw std::runtime_error("parse_network: combiner port arity");
                CombinerRecord c;
                c.port_in_a = pin[0];
                c.port_in_b = pin[1];
                c.port_out = pout[0];
                c.kind = (kind == "wilkinson") ? CombinerKind::Wilkinson3Port
                                               : CombinerKind::RatRace4Port;
                c.ratio = std::stod(fields.at("ratio"));
                const std::string iso = fields.at("iso_route");
                c.iso_port = (iso == "-") ? -1 : std::stoi(iso);
                stage.combiners.push_back(c);
            } else {
                throw std::runtime_error("parse_network: unknown record kind '" + kind + "'");
            }
        } else {
            throw std::runtime_error("parse_network: unknown line '" + line + "'");
        }
    }
    net.validate();
    return net;
}

}  // namespace hybridbf
