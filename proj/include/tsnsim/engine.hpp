#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "tsnsim/config.hpp"
#include "tsnsim/faults.hpp"
#include "tsnsim/trace.hpp"

namespace tsnsim {

/// Declaration order is the dispatch rank at equal timestamps.
enum class EventKind : std::uint8_t {
    TxComplete,
    GateTransition,
    PsfpGateTransition,
    FrameArrival,
    TalkerEmit,
    SimEnd,
};

struct Event {
    Nanos time{0};
    EventKind kind = EventKind::SimEnd;
    std::uint64_t seq = 0;     // assigned by EventQueue::schedule
    std::uint32_t target = 0;  // node, port or gate index, by kind
    std::uint32_t frame = 0;
    std::uint32_t aux = 0;
    /// FrameArrival only: 0 = last bit reached node `target` from node
    /// `aux`; 1 = processing done, enqueue on port `target`, queue `aux`.
    std::uint8_t stage = 0;
};

/// Time-ordered event queue with a monotone virtual clock. Ties break on
/// kind rank, then on scheduling order.
class EventQueue {
public:
    /// Throws InternalError for an event earlier than now().
    void schedule(Event e);

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    Nanos now() const { return now_; }

    /// Removes the earliest event and advances the clock to it.
    Event pop();

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.kind != b.kind) return a.kind > b.kind;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    Nanos now_{0};
    std::uint64_t next_seq_ = 0;
};

/// Unperturbed emissions k*period + send_offset for every emission instant
/// below `until`, then perturbed by the scenario's actions for this stream.
/// Frames of one period leave at the same instant in seq order.
std::vector<Emission> emit_talker_frames(const StreamSpec& stream, const FaultScenario& scenario, Nanos until);

struct StreamStats {
    std::uint64_t emitted = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_psfp = 0;
    std::uint64_t dropped_overflow = 0;
    std::uint64_t dropped_forwarding = 0;
    std::uint64_t in_flight = 0;

    std::uint64_t dropped() const { return dropped_psfp + dropped_overflow + dropped_forwarding; }
    bool conserved() const { return emitted == delivered + dropped() + in_flight; }
};

struct RunStats {
    std::map<StreamId, StreamStats> per_stream;  // includes synthetic streams
    StreamStats total;
    std::uint64_t events_dispatched = 0;
    std::uint64_t guard_deferrals = 0;  // frames held back by the guard, once per frame and port
};

/// Live queue counter sampled after an event, for cross-checking the
/// occupancy series reconstructed from the trace.
struct OccupancyProbe {
    Nanos time{0};
    std::string port;
    int queue = 0;
    Bytes queued = 0;                 // waiting, not yet on the wire
    double in_flight_remaining = 0.0;  // unsent bytes of the frame on the wire
};

struct RunOptions {
    bool occupancy_probe = false;
};

struct RunResult {
    TraceLog trace;
    RunStats stats;
    std::vector<OccupancyProbe> probes;
};

/// Executes the configuration until sim_end. Events at exactly sim_end are
/// still dispatched. Throws ConfigError when validation fails.
RunResult run(const SimConfig& config, const RunOptions& options = {});

}  // namespace tsnsim
