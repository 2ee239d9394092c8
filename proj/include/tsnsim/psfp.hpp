#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsnsim/model.hpp"

namespace tsnsim {

// ---------------------------------------------------------------------------
// Configuration

struct StreamFilter {
    int order = 0;
    std::optional<StreamId> match_stream;  // nullopt = wildcard
    std::optional<int> match_priority;     // nullopt = wildcard
    std::optional<Bytes> max_sdu;
    std::string gate_ref;
    std::optional<std::string> meter_ref;

    friend bool operator==(const StreamFilter&, const StreamFilter&) = default;
};

struct StreamGateEntry {
    Nanos start{0};
    Nanos end{0};
    bool open = false;
    std::optional<int> ipv;

    friend bool operator==(const StreamGateEntry&, const StreamGateEntry&) = default;
};

/// Timed stream gate. Same coverage rules as a GateControlList; points not
/// covered by an entry are closed.
struct StreamGate {
    std::string gate_id;
    Nanos cycle_time{0};
    Nanos base_time{0};
    std::vector<StreamGateEntry> entries;

    friend bool operator==(const StreamGate&, const StreamGate&) = default;
};

struct FlowMeterParams {
    std::string meter_id;
    BitRate cir = 0;
    Bytes cbs = 0;
    BitRate eir = 0;
    Bytes ebs = 0;
    bool drop_yellow = false;

    friend bool operator==(const FlowMeterParams&, const FlowMeterParams&) = default;
};

struct PsfpConfig {
    std::vector<StreamFilter> filters;
    std::map<std::string, StreamGate> gates;
    std::map<std::string, FlowMeterParams> meters;
    /// Frames matching no filter are dropped instead of passed.
    bool fail_closed = false;

    friend bool operator==(const PsfpConfig&, const PsfpConfig&) = default;
};

/// PSFP instance bound to a bridge ingress port. `ingress` names the
/// neighbor the frame arrives from, or "*" for every ingress port.
struct PsfpAttachment {
    NodeId bridge;
    NodeId ingress = "*";
    PsfpConfig config;

    friend bool operator==(const PsfpAttachment&, const PsfpAttachment&) = default;
};

// ---------------------------------------------------------------------------
// Stream gate

struct StreamGateState {
    bool open = false;
    std::optional<int> ipv;
};

StreamGateState stream_gate_state_at(const StreamGate& gate, Nanos t);

/// Next instant after t at which the gate state (open flag or IPV) changes.
Nanos next_stream_gate_change(const StreamGate& gate, Nanos t);

// ---------------------------------------------------------------------------
// Two-rate three-color meter (color-blind, uncoupled buckets)

enum class Color { Green, Yellow, Red };

const char* to_string(Color c);

/// Token state is held in "byte-nanosecond-rate" units: one byte equals
/// 8e9 units, so a refill over dt ns at r bits/s adds exactly r*dt units.
class FlowMeter {
public:
    static constexpr std::int64_t kUnitsPerByte = 8'000'000'000;

    explicit FlowMeter(FlowMeterParams params, Nanos start = Nanos::zero());

    const FlowMeterParams& params() const { return params_; }
    Nanos last_update() const { return last_update_; }

    /// Whole bytes currently available (floor).
    Bytes committed_tokens() const { return committed_ / kUnitsPerByte; }
    Bytes excess_tokens() const { return excess_ / kUnitsPerByte; }

    void set_tokens(Bytes committed, Bytes excess);

    friend Color meter_frame(FlowMeter& meter, Bytes size, Nanos t);

private:
    FlowMeterParams params_;
    __int128 committed_ = 0;
    __int128 excess_ = 0;
    Nanos last_update_{0};
};

/// Refills both buckets up to t, then classifies a frame of `size` bytes and
/// debits the matching bucket. Throws InternalError if t < last_update.
Color meter_frame(FlowMeter& meter, Bytes size, Nanos t);

// ---------------------------------------------------------------------------
// Ingress pipeline

enum class PsfpDropReason { MaxSdu, GateClosed, MeterRed, MeterYellow, NoMatch };

const char* to_string(PsfpDropReason r);

struct FilterVerdict {
    bool pass = true;
    int effective_priority = 0;
    PsfpDropReason reason = PsfpDropReason::NoMatch;
    int filter_index = -1;  // into Psfp::filters(), -1 if unmatched
    std::optional<std::string> meter_id;
    std::optional<Color> color;
};

struct FilterCounters {
    std::uint64_t matched = 0;
    std::uint64_t passed = 0;
    std::uint64_t dropped = 0;
};

/// Runtime state of one PSFP instance: meter buckets and filter counters.
class Psfp {
public:
    explicit Psfp(PsfpConfig config);

    FilterVerdict filter_frame(const Frame& frame, Nanos t);

    /// Filters in evaluation order (ascending `order`).
    const std::vector<StreamFilter>& filters() const { return filters_; }
    const std::vector<FilterCounters>& counters() const { return counters_; }
    const PsfpConfig& config() const { return config_; }
    const FlowMeter* meter(const std::string& id) const;

private:
    PsfpConfig config_;
    std::vector<StreamFilter> filters_;
    std::vector<FilterCounters> counters_;
    std::map<std::string, FlowMeter> meters_;
};

}  // namespace tsnsim
