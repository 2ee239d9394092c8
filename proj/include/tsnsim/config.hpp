#pragma once

#include <compare>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tsnsim/faults.hpp"
#include "tsnsim/model.hpp"
#include "tsnsim/psfp.hpp"

namespace tsnsim {

/// Egress port of `node` towards `neighbor`.
struct PortKey {
    NodeId node;
    NodeId neighbor;

    std::string name() const { return node + "->" + neighbor; }
    auto operator<=>(const PortKey&) const = default;
};

struct PortGcl {
    PortKey port;
    GateControlList gcl;

    friend bool operator==(const PortGcl&, const PortGcl&) = default;
};

struct SimConfig {
    std::string name;
    std::vector<std::string> notes;

    Topology topology;
    std::vector<StreamSpec> streams;
    std::vector<PortGcl> gcls;  // ports without an entry are always open
    std::vector<PsfpAttachment> psfp;
    FaultScenario scenario;

    Nanos sim_end{0};
    Bytes queue_capacity = 0;  // per egress queue; 0 = unbounded
    Nanos processing_delay{0};
    bool include_l1_overhead = false;
    Bytes min_frame_size = 64;
    Bytes max_frame_size = 1522;

    const GateControlList* gcl_for(const PortKey& port) const;
    const StreamSpec* find_stream(const StreamId& id) const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Adds forwarding entries implied by stream paths that are not already
/// present (the static MAC tables every bridge is preloaded with).
void prefill_forwarding(SimConfig& config);

/// lcm of stream periods, GCL cycles and PSFP stream gate cycles; zero
/// when the config has none of them.
Nanos schedule_hyperperiod(const SimConfig& config);

/// Parses a config document. Durations accept ns/us/ms/s suffixes.
/// Throws ConfigError with a diagnostic on malformed input.
SimConfig parse_config(std::string_view text);
/// Throws IoError when the file cannot be read.
SimConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering; parse_config(dump_config(c)) == c.
std::string dump_config(const SimConfig& config);

}  // namespace tsnsim
