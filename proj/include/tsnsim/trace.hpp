#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsnsim/errors.hpp"
#include "tsnsim/model.hpp"
#include "tsnsim/psfp.hpp"

namespace tsnsim {

// A frame's events follow
//   emit -> enqueue -> [defer] -> tx_start -> tx_end
//        -> (arrive -> enqueue -> [defer] -> tx_start -> tx_end)* -> deliver | drop
// where drop may end the sequence at any step. Egress events carry the port
// name ("B1->B2") as their location; emit/arrive/deliver and ingress drops
// carry the node name.
enum class FrameEventKind : std::uint8_t { Emit, Arrive, Enqueue, Defer, TxStart, TxEnd, Deliver, Drop };

const char* to_string(FrameEventKind k);
FrameEventKind frame_event_kind_from_string(std::string_view s);

struct FrameEvent {
    Nanos time{0};
    std::uint32_t location = 0;  // interned
    std::uint32_t stream = 0;    // interned
    std::uint64_t seq = 0;
    FrameEventKind kind = FrameEventKind::Emit;
    std::int8_t queue = -1;
    Bytes size = 0;
    std::uint32_t detail = 0;  // interned; drop reason etc.
};

/// Gate state change. For TAS ports `queue` is the transmission queue; for
/// PSFP stream gates it is the IPV (or -1).
struct GateEvent {
    Nanos time{0};
    std::uint32_t port = 0;  // interned
    std::int8_t queue = 0;
    bool open = false;
};

struct MeterEvent {
    Nanos time{0};
    std::uint32_t meter = 0;   // interned
    std::uint32_t stream = 0;  // interned
    std::uint64_t seq = 0;
    Color color = Color::Green;
};

/// Append-only record of one run. Names are interned; index 0 is "".
class TraceLog {
public:
    TraceLog();

    std::uint32_t intern(std::string_view name);
    const std::string& name(std::uint32_t id) const { return names_.at(id); }
    std::optional<std::uint32_t> find(std::string_view name) const;

    std::vector<FrameEvent> frame_events;
    std::vector<GateEvent> gate_events;
    std::vector<MeterEvent> meter_events;

    /// Equality over resolved names, independent of interning order.
    friend bool operator==(const TraceLog& a, const TraceLog& b);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

// ---------------------------------------------------------------------------
// Derived series

struct OccupancyPoint {
    Nanos time{0};
    double bytes = 0.0;
};

/// Piecewise-linear queue occupancy: step up on enqueue, linear ramp down
/// over [tx_start, tx_end]. Two points at the same instant encode a step.
/// A frame still on the wire when the run ends has no tx_end and stays
/// counted in full.
struct OccupancySeries {
    std::string port;
    int queue = 0;
    std::optional<StreamId> stream;
    std::vector<OccupancyPoint> points;

    /// Value just after all steps at t.
    double value_at(Nanos t) const;
    /// Left limit at t.
    double value_before(Nanos t) const;
    /// Maximum over [from, to).
    double peak(Nanos from, Nanos to) const;
};

/// Throws QueryError if the port/queue never appears in the log. With
/// `stream`, only that stream's contribution is included.
OccupancySeries occupancy_series(const TraceLog& log, const std::string& port, int queue,
                                 const std::optional<StreamId>& stream = std::nullopt);

struct LatencySample {
    std::uint64_t seq = 0;
    Nanos emitted{0};
    std::optional<Nanos> delivered;
    Nanos latency{0};  // delivered - emitted; zero when dropped
    bool dropped = false;
    std::string drop_reason;
};

/// Delivered and dropped frames of one stream in seq order. Frames still in
/// flight at the end of the run are omitted. Throws QueryError for an
/// unknown stream.
std::vector<LatencySample> latency_series(const TraceLog& log, const StreamId& stream);

/// Stream ids present in the log, in first-emission order.
std::vector<StreamId> streams_in(const TraceLog& log);

/// Sorted (time, open) transitions of one gate.
std::vector<std::pair<Nanos, bool>> gate_band(const TraceLog& log, const std::string& port, int queue);

// ---------------------------------------------------------------------------
// CSV

std::string frames_csv(const TraceLog& log);
std::string latency_csv(const TraceLog& log);
std::string gates_csv(const TraceLog& log);
std::string meters_csv(const TraceLog& log);

/// Parses the text produced by the exporters above back into a log.
void parse_frames_csv(std::string_view text, TraceLog& into);
void parse_gates_csv(std::string_view text, TraceLog& into);
void parse_meters_csv(std::string_view text, TraceLog& into);

/// Writes text to path; throws IoError naming the path and cause.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// frames.csv, latency.csv, gates.csv, meters.csv under dir.
void export_csv(const TraceLog& log, const std::filesystem::path& dir);

/// Loads frames.csv (required), gates.csv and meters.csv (optional).
TraceLog read_trace_dir(const std::filesystem::path& dir);

}  // namespace tsnsim
