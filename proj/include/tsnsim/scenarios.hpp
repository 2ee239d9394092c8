#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tsnsim/config.hpp"
#include "tsnsim/engine.hpp"

namespace tsnsim {

/// One machine-checkable assertion over a run. Returns a failure message,
/// or nullopt when the assertion holds.
struct Expectation {
    std::string description;
    std::function<std::optional<std::string>(const RunResult&)> check;
};

struct NetworkScenario {
    std::string name;
    SimConfig config;
    std::vector<Expectation> expected;
};

// Single-link scenarios: talkers on separate links into bridge "BR", one
// gated egress "BR->L" towards the listener "L", 1 Gbit/s, priority 7.
inline constexpr const char* kSingleLinkPort = "BR->L";

SimConfig build_no_fault();
SimConfig build_additional();
SimConfig build_late_frame();
SimConfig build_delayed_stream();
SimConfig build_early();
SimConfig build_missing();
/// `queue_capacity` 0 keeps the queue unbounded.
SimConfig build_continuous_increase(Bytes queue_capacity = 0);

// ---------------------------------------------------------------------------
// Seven-stream network

inline constexpr int kSevenStreamCount = 7;  // A..G

/// Free parameters of the reconstructed network schedule. Every bridge hop
/// transmits at offset + h * (tx + hop_gap); each slot is tx + slot_margin
/// long.
struct SevenStreamDesign {
    std::array<Bytes, kSevenStreamCount> frame_size{};
    std::array<Nanos, kSevenStreamCount> send_offset{};
    Nanos hop_gap{0};
    Nanos slot_margin{0};
    Nanos psfp_slack{0};
};

SevenStreamDesign default_seven_stream_design();

/// Overlapping slots or talker collisions; empty for a usable design.
std::vector<std::string> seven_stream_design_conflicts(const SevenStreamDesign& design);

/// Fault-free network: 5 bridges, 5 end stations, streams A..G.
SimConfig build_seven_stream_network(const SevenStreamDesign& design = default_seven_stream_design());
/// Time-based stream gates on every end-station-facing bridge ingress.
void add_seven_stream_psfp(SimConfig& config, const SevenStreamDesign& design = default_seven_stream_design());
/// ShiftFrame on stream A for the frame nearest 10 ms, +10 us.
FaultAction seven_stream_late_frame_fault();

/// Fault-free latency of each stream under the design.
Nanos seven_stream_planned_latency(const SevenStreamDesign& design, int stream);

// ---------------------------------------------------------------------------
// Bundle

std::vector<std::string> scenario_names();
/// Throws ConfigError for an unknown name.
NetworkScenario bundled_scenario(const std::string& name);

}  // namespace tsnsim
