#ifndef HYBRIDBF_MICROWAVE_NETWORK_HPP
#define HYBRIDBF_MICROWAVE_NETWORK_HPP

#include <iosfwd>
#include <string>
#include <vector>

// Staged microwave component network realizing an RFBN matrix.  Signals
// travel on numbered lines; every record consumes input lines and drives
// fresh output lines, so the graph is acyclic by construction.  Line ids
// 0..n_trx-1 are the transceiver ports; antenna_ports names the line
// feeding each antenna.

namespace hybridbf {

enum class StageKind { DividerBank, PhaseBank, CombinerBank };
enum class CombinerKind { Wilkinson3Port, RatRace4Port };

struct DividerRecord {
    int port_in = -1;
    int port_out_a = -1;
    int port_out_b = -1;
    double ratio = 0.5;  // power fraction to port_out_a, in (0, 1)
};

struct PhaseRecord {
    int port_in = -1;
    int port_out = -1;
    double phase_rad = 0.0;
};

struct CombinerRecord {
    int port_in_a = -1;
    int port_in_b = -1;
    int port_out = -1;
    CombinerKind kind = CombinerKind::Wilkinson3Port;
    double ratio = 0.5;  // design power fraction of port_in_b
    int iso_port = -1;   // rat-race only: -1 terminates the isolation port
};

struct NetworkStage {
    StageKind kind = StageKind::DividerBank;
    std::vector<DividerRecord> dividers;
    std::vector<PhaseRecord> phases;
    std::vector<CombinerRecord> combiners;
};

struct MicrowaveNetwork {
    int n_trx = 0;
    int n_antennas = 0;
    int n_lines = 0;
    std::vector<NetworkStage> stages;
    std::vector<int> antenna_ports;  // line feeding antenna i

    // Structural checks: acyclic line numbering, single-producer and
    // single-consumer lines, stage-count limit, reachable antenna ports.
    void validate() const;

    int combiner_stage_count() const;
    int divider_stage_count() const;
};

// Text serialization (one typed record per line).
std::string serialize_network(const MicrowaveNetwork& network);
MicrowaveNetwork parse_network(const std::string& text);

}  // namespace hybridbf

#endif
