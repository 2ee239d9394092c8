#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsnsim/time.hpp"

namespace tsnsim {

using NodeId = std::string;
using StreamId = std::string;

/// Bit q set means the transmission gate of queue q is open.
using GateVector = std::uint8_t;

inline constexpr int kNumQueues = 8;
inline constexpr GateVector kAllOpen = 0xFF;
inline constexpr GateVector kAllClosed = 0x00;

constexpr bool gate_open(GateVector v, int queue) { return ((v >> queue) & 1U) != 0; }

enum class NodeKind { EndStation, Bridge };

struct Node {
    NodeId id;
    NodeKind kind = NodeKind::EndStation;

    friend bool operator==(const Node&, const Node&) = default;
};

/// Full-duplex link; each direction is an independent egress port.
struct Link {
    NodeId a;
    NodeId b;
    BitRate rate_bps = 1'000'000'000;
    Nanos propagation_delay{0};

    bool connects(const NodeId& x, const NodeId& y) const {
        return (a == x && b == y) || (a == y && b == x);
    }
    friend bool operator==(const Link&, const Link&) = default;
};

struct ForwardingEntry {
    NodeId bridge;
    StreamId stream_id;
    NodeId next_hop;

    friend bool operator==(const ForwardingEntry&, const ForwardingEntry&) = default;
};

struct Topology {
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::vector<ForwardingEntry> forwarding;

    const Node* find_node(const NodeId& id) const;
    const Link* find_link(const NodeId& x, const NodeId& y) const;
    std::optional<NodeId> next_hop(const NodeId& bridge, const StreamId& stream) const;

    friend bool operator==(const Topology&, const Topology&) = default;
};

struct StreamSpec {
    StreamId stream_id;
    NodeId talker;
    NodeId listener;
    std::vector<NodeId> path;  // bridges, in forwarding order
    Nanos period{0};
    Nanos send_offset{0};
    Bytes frame_size = 0;
    int priority = 7;
    int frames_per_period = 1;

    /// talker, path..., listener
    std::vector<NodeId> hops() const;

    friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

/// Gate vector for the half-open interval [start, end) of a cycle.
struct GclEntry {
    Nanos start{0};
    Nanos end{0};
    GateVector gates = kAllClosed;

    friend bool operator==(const GclEntry&, const GclEntry&) = default;
};

struct GateControlList {
    Nanos cycle_time{0};
    std::vector<GclEntry> entries;
    Nanos base_time{0};

    static GateControlList always(GateVector gates, Nanos cycle);

    friend bool operator==(const GateControlList&, const GateControlList&) = default;
};

struct FrameArrival {
    NodeId node;
    Nanos time{0};

    friend bool operator==(const FrameArrival&, const FrameArrival&) = default;
};

struct Frame {
    StreamId stream_id;
    std::uint64_t seq = 0;
    Bytes size = 0;
    int priority = 7;
    Nanos created_at{0};
    std::vector<FrameArrival> arrivals;
    /// Stream whose forwarding entries this frame follows. Equal to
    /// stream_id except for injected frames.
    StreamId route;
    bool synthetic = false;

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Least common multiple of all stream periods.
/// Throws ConfigError on an empty list or a non-positive period.
Nanos hyperperiod(std::span<const StreamSpec> streams);

/// Gates of the entry containing (t - base_time) mod cycle_time.
/// Points not covered by any entry read as all-closed.
GateVector gate_state_at(const GateControlList& gcl, Nanos t);

bool is_gate_open(const GateControlList& gcl, int queue, Nanos t);

/// Earliest t' > t at which the gate of `queue` goes from open to closed,
/// or kNever if it stays open for the whole cycle.
/// Throws std::invalid_argument if the gate is closed at t.
Nanos next_gate_close(const GateControlList& gcl, int queue, Nanos t);

/// Earliest t' > t at which the gate vector differs from the one at t,
/// or kNever for a constant schedule.
Nanos next_gate_change(const GateControlList& gcl, Nanos t);

/// Builds contiguous entries from open windows of one queue inside a cycle.
/// Windows must be sorted, non-overlapping and inside [0, cycle).
GateControlList gcl_from_windows(Nanos cycle, int queue,
                                 const std::vector<std::pair<Nanos, Nanos>>& windows,
                                 GateVector background = kAllClosed);

}  // namespace tsnsim
