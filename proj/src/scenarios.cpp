#include "tsnsim/scenarios.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "tsnsim/errors.hpp"

namespace tsnsim {

using namespace std::chrono_literals;

namespace {

constexpr BitRate kGigabit = 1'000'000'000;

struct Talker {
    StreamId stream;
    NodeId node;
    Bytes size;
    Nanos offset;
};

using Window = std::pair<Nanos, Nanos>;

SimConfig single_link(std::string name, const std::vector<Talker>& talkers, Nanos period,
                      const std::vector<Window>& windows, Nanos sim_end) {
    SimConfig c;
    c.name = std::move(name);
    auto& topo = c.topology;
    topo.nodes.push_back({"BR", NodeKind::Bridge});
    topo.nodes.push_back({"L", NodeKind::EndStation});
    topo.links.push_back({"BR", "L", kGigabit, 0ns});
    for (const auto& t : talkers) {
        topo.nodes.push_back({t.node, NodeKind::EndStation});
        topo.links.push_back({t.node, "BR", kGigabit, 0ns});
        StreamSpec s;
        s.stream_id = t.stream;
        s.talker = t.node;
        s.listener = "L";
        s.path = {"BR"};
        s.period = period;
        s.send_offset = t.offset;
        s.frame_size = t.size;
        s.priority = 7;
        c.streams.push_back(s);
    }
    c.gcls.push_back({{"BR", "L"}, gcl_from_windows(period, 7, windows)});
    c.sim_end = sim_end;
    prefill_forwarding(c);
    return c;
}

// magenta 1000 B at 0, blue 500 B at 6 us; one 14 us window fits both.
SimConfig shared_window(std::string name) {
    auto c = single_link(std::move(name),
                         {{"magenta", "T1", 1000, 0us}, {"blue", "T2", 500, 6us}}, 30us, {{12us, 26us}}, 3ms);
    c.notes = {"1 Gbit/s: magenta 1000 B = 8 us on the wire, blue 500 B = 4 us.",
               "Magenta reaches BR at 8 us and blue at 10 us; both wait for the window [12, 26) us.",
               "Magenta transmits 12-20 us and blue 20-24 us; the queue is empty again from 24 us."};
    return c;
}

// magenta 1000 B at 0 (arrives 8 us), blue 500 B at 22 us (arrives 26 us);
// one slot per stream.
SimConfig two_slots(std::string name) {
    auto c = single_link(std::move(name),
                         {{"magenta", "T1", 1000, 0us}, {"blue", "T2", 500, 22us}}, 40us,
                         {{10us, 20us}, {30us, 40us}}, 4400us);
    c.notes = {"Slot M [10, 20) us for magenta (8 us frame), slot B [30, 40) us for blue (4 us frame).",
               "Guard point of slot M: 12 us, of slot B: 36 us (last start that still fits a 8 us frame)."};
    return c;
}

FaultAction shift_frame(const StreamId& s, std::uint64_t seq, Nanos shift) {
    FaultAction a;
    a.kind = FaultKind::ShiftFrame;
    a.stream_id = s;
    a.seq = seq;
    a.shift = shift;
    return a;
}

}  // namespace

SimConfig build_no_fault() { return shared_window("no_fault"); }

SimConfig build_early() {
    auto c = shared_window("early");
    c.scenario.actions.push_back(shift_frame("blue", 1, -4us));
    c.notes.push_back("Fault: blue seq 1 leaves 4 us early (32 us), reaches BR at 36 us ahead of magenta (38 us).");
    return c;
}

SimConfig build_missing() {
    auto c = shared_window("missing");
    FaultAction a;
    a.kind = FaultKind::DropFrame;
    a.stream_id = "magenta";
    a.seq = 1;
    c.scenario.actions.push_back(a);
    c.notes.push_back("Fault: magenta seq 1 is never sent; blue seq 1 starts at the gate opening (42 us).");
    return c;
}

SimConfig build_additional() {
    auto c = two_slots("additional");
    FaultAction a;
    a.kind = FaultKind::InjectFrame;
    a.stream_id = "blue";
    a.inject = {42us, 500, 7};
    c.scenario.actions.push_back(a);
    c.notes.push_back("Fault: an unplanned 500 B frame leaves T2 at 42 us and reaches BR at 46 us.");
    return c;
}

SimConfig build_late_frame() {
    auto c = two_slots("late_frame");
    c.scenario.actions.push_back(shift_frame("magenta", 1, 6us));
    c.notes.push_back("Fault: magenta seq 1 leaves 6 us late and reaches BR at 54 us, past the guard point 52 us.");
    return c;
}

SimConfig build_delayed_stream() {
    auto c = two_slots("delayed_stream");
    FaultAction a;
    a.kind = FaultKind::ShiftStream;
    a.stream_id = "magenta";
    a.from_seq = 0;
    a.shift = 6us;
    c.scenario.actions.push_back(a);
    c.notes.push_back("Fault: every magenta frame leaves 6 us late and misses slot M.");
    return c;
}

SimConfig build_continuous_increase(Bytes queue_capacity) {
    auto c = single_link(queue_capacity > 0 ? "continuous_increase_bounded" : "continuous_increase",
                         {{"small", "TS", 250, 0us}, {"medium", "TM", 625, 8us}, {"large", "TL", 1250, 25us}}, 60us,
                         {{4us, 7us}, {15us, 21us}, {37us, 48us}}, 6ms);
    c.queue_capacity = queue_capacity;
    c.notes = {"small 250 B (2 us), medium 625 B (5 us), large 1250 B (10 us).",
               "Slots S [4, 7), M [15, 21), L [37, 48) us, each 1 us longer than its frame.",
               "Fault: the small stream leaves 16 us late from seq 0, so its frame reaches BR at 18 us."};
    FaultAction a;
    a.kind = FaultKind::ShiftStream;
    a.stream_id = "small";
    a.from_seq = 0;
    a.shift = 16us;
    c.scenario.actions.push_back(a);
    return c;
}

// ---------------------------------------------------------------------------
// Seven-stream network

namespace {

constexpr Nanos kNetPeriod = 60us;
constexpr Nanos kNetSimEnd = 600ms;

struct SevenStreamRow {
    const char* id;
    const char* talker;
    std::array<const char*, 3> path;
    const char* listener;
};

constexpr std::array<SevenStreamRow, kSevenStreamCount> kRows{{
    {"A", "ES1", {"B1", "B2", "B3"}, "ES3"},
    {"B", "ES2", {"B2", "B3", "B4"}, "ES4"},
    {"C", "ES3", {"B3", "B4", "B1"}, "ES1"},
    {"D", "ES4", {"B4", "B1", "B2"}, "ES2"},
    {"E", "ES3", {"B3", "B4", "B5"}, "ES5"},
    {"F", "ES4", {"B4", "B5", "B2"}, "ES2"},
    {"G", "ES5", {"B5", "B2", "B1"}, "ES1"},
}};

Nanos tx_time(Bytes size) { return transmission_time(size, kGigabit, false); }

struct PlannedSlot {
    PortKey port;
    int stream;
    Nanos start;  // absolute plan time of the transmission start, unreduced
    Nanos length;
};

// Hop 0 is the talker port, hops 1..3 the bridge egress ports.
std::vector<PlannedSlot> plan(const SevenStreamDesign& d) {
    std::vector<PlannedSlot> out;
    for (int s = 0; s < kSevenStreamCount; ++s) {
        const auto& r = kRows[static_cast<std::size_t>(s)];
        const std::array<const char*, 5> hops{r.talker, r.path[0], r.path[1], r.path[2], r.listener};
        const Nanos tx = tx_time(d.frame_size[static_cast<std::size_t>(s)]);
        for (int h = 0; h < 4; ++h) {
            const Nanos start = d.send_offset[static_cast<std::size_t>(s)] + h * (tx + d.hop_gap);
            const Nanos len = h == 0 ? tx : tx + d.slot_margin;
            out.push_back({{hops[static_cast<std::size_t>(h)], hops[static_cast<std::size_t>(h) + 1]}, s, start, len});
        }
    }
    return out;
}

bool overlap_mod(Nanos a0, Nanos alen, Nanos b0, Nanos blen, Nanos cycle) {
    const Nanos a = positive_mod(a0, cycle);
    const Nanos b = positive_mod(b0, cycle);
    // Compare each interval against the other and its shifted copies.
    for (int k = -1; k <= 1; ++k) {
        const Nanos bs = b + k * cycle;
        if (a < bs + blen && bs < a + alen) return true;
    }
    return false;
}

std::string stream_name(int s) { return kRows[static_cast<std::size_t>(s)].id; }

}  // namespace

SevenStreamDesign default_seven_stream_design() {
    SevenStreamDesign d;
    d.frame_size = {1000, 875, 500, 1250, 625, 250, 1125};
    d.send_offset = {45us, 20us, 6us, 51us, 50us, 41us, 40us};
    d.hop_gap = 1us;
    d.slot_margin = 0ns;
    d.psfp_slack = 2us;
    return d;
}

std::vector<std::string> seven_stream_design_conflicts(const SevenStreamDesign& d) {
    std::vector<std::string> out;
    const auto slots = plan(d);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].length >= kNetPeriod) out.push_back(slots[i].port.name() + ": slot longer than the period");
        for (std::size_t j = i + 1; j < slots.size(); ++j) {
            if (slots[i].port != slots[j].port) continue;
            if (overlap_mod(slots[i].start, slots[i].length, slots[j].start, slots[j].length, kNetPeriod)) {
                out.push_back(slots[i].port.name() + ": " + stream_name(slots[i].stream) + " overlaps " +
                              stream_name(slots[j].stream));
            }
        }
    }
    for (int s = 0; s < kSevenStreamCount; ++s) {
        const auto size = d.frame_size[static_cast<std::size_t>(s)];
        const auto off = d.send_offset[static_cast<std::size_t>(s)];
        if (size < 250 || size > 1250) out.push_back(stream_name(s) + ": frame size outside [250, 1250] B");
        if (off < 0ns || off >= kNetPeriod) out.push_back(stream_name(s) + ": offset outside the period");
        if (seven_stream_planned_latency(d, s) >= 100us) out.push_back(stream_name(s) + ": planned latency >= 100 us");
    }
    return out;
}

Nanos seven_stream_planned_latency(const SevenStreamDesign& d, int s) {
    const Nanos tx = tx_time(d.frame_size[static_cast<std::size_t>(s)]);
    return 4 * tx + 3 * d.hop_gap;
}

SimConfig build_seven_stream_network(const SevenStreamDesign& d) {
    if (auto conflicts = seven_stream_design_conflicts(d); !conflicts.empty()) {
        throw ConfigError("seven-stream design: " + conflicts.front());
    }
    SimConfig c;
    c.name = "network_baseline";
    auto& topo = c.topology;
    for (int i = 1; i <= 5; ++i) topo.nodes.push_back({"B" + std::to_string(i), NodeKind::Bridge});
    for (int i = 1; i <= 5; ++i) topo.nodes.push_back({"ES" + std::to_string(i), NodeKind::EndStation});
    for (int i = 1; i <= 5; ++i) topo.links.push_back({"ES" + std::to_string(i), "B" + std::to_string(i), kGigabit, 0ns});
    for (const auto& [a, b] : std::vector<std::pair<const char*, const char*>>{
             {"B1", "B2"}, {"B2", "B3"}, {"B3", "B4"}, {"B4", "B1"}, {"B4", "B5"}, {"B5", "B2"}}) {
        topo.links.push_back({a, b, kGigabit, 0ns});
    }

    for (int s = 0; s < kSevenStreamCount; ++s) {
        const auto& r = kRows[static_cast<std::size_t>(s)];
        StreamSpec spec;
        spec.stream_id = r.id;
        spec.talker = r.talker;
        spec.listener = r.listener;
        spec.path = {r.path[0], r.path[1], r.path[2]};
        spec.period = kNetPeriod;
        spec.send_offset = d.send_offset[static_cast<std::size_t>(s)];
        spec.frame_size = d.frame_size[static_cast<std::size_t>(s)];
        spec.priority = 7;
        c.streams.push_back(spec);
    }

    // One GCL per bridge egress port carrying scheduled traffic; talker
    // ports stay ungated.
    std::map<PortKey, std::vector<Window>> windows;
    for (const auto& slot : plan(d)) {
        if (slot.port.node.rfind("ES", 0) == 0) continue;
        windows[slot.port].emplace_back(slot.start, slot.start + slot.length);
    }
    for (auto& [port, w] : windows) {
        for (auto& [a, b] : w) {
            const Nanos len = b - a;
            a = positive_mod(a, kNetPeriod);
            b = a + len;
        }
        std::sort(w.begin(), w.end());
        // A window may wrap; split it so every piece lies inside the cycle.
        std::vector<Window> flat;
        for (const auto& [a, b] : w) {
            if (b <= kNetPeriod) {
                flat.emplace_back(a, b);
            } else {
                flat.emplace_back(a, kNetPeriod);
                flat.emplace_back(0ns, b - kNetPeriod);
            }
        }
        std::sort(flat.begin(), flat.end());
        c.gcls.push_back({port, gcl_from_windows(kNetPeriod, 7, flat)});
    }

    c.sim_end = kNetSimEnd;
    prefill_forwarding(c);

    std::ostringstream sizes;
    std::ostringstream offsets;
    for (int s = 0; s < kSevenStreamCount; ++s) {
        sizes << (s ? ", " : "") << stream_name(s) << " " << d.frame_size[static_cast<std::size_t>(s)] << " B";
        offsets << (s ? ", " : "") << stream_name(s) << " "
                << format_duration(d.send_offset[static_cast<std::size_t>(s)]);
    }
    c.notes = {
        "Reconstructed schedule: paths are fixed; sizes, offsets and windows are chosen here.",
        "Frame sizes: " + sizes.str() + ".",
        "Send offsets: " + offsets.str() + ".",
        "Bridge hop h of a stream starts at offset + h * (tx + " + format_duration(d.hop_gap) + "); its window is tx + " +
            format_duration(d.slot_margin) + " long, so the fault-free latency is 4 * tx + 3 * " +
            format_duration(d.hop_gap) + ".",
        "All streams share queue 7; windows of different streams on one port never overlap.",
    };
    return c;
}

void add_seven_stream_psfp(SimConfig& c, const SevenStreamDesign& d) {
    std::map<NodeId, PsfpAttachment> by_bridge;
    for (int s = 0; s < kSevenStreamCount; ++s) {
        const auto& r = kRows[static_cast<std::size_t>(s)];
        auto& att = by_bridge[r.path[0]];
        att.bridge = r.path[0];
        att.ingress = r.talker;
        // Last bit reaches the first bridge tx after the send offset.
        const Nanos arrival = d.send_offset[static_cast<std::size_t>(s)] + tx_time(d.frame_size[static_cast<std::size_t>(s)]);
        const Nanos open = positive_mod(arrival - d.psfp_slack, kNetPeriod);
        const Nanos close = open + 2 * d.psfp_slack;

        StreamGate g;
        g.gate_id = std::string("gate_") + r.id;
        g.cycle_time = kNetPeriod;
        auto add = [&](Nanos a, Nanos b, bool is_open) {
            if (a < b) g.entries.push_back({a, b, is_open, std::nullopt});
        };
        if (close <= kNetPeriod) {
            add(0ns, open, false);
            add(open, close, true);
            add(close, kNetPeriod, false);
        } else {
            add(0ns, close - kNetPeriod, true);
            add(close - kNetPeriod, open, false);
            add(open, kNetPeriod, true);
        }
        att.config.gates.emplace(g.gate_id, g);

        StreamFilter f;
        f.order = static_cast<int>(att.config.filters.size());
        f.match_stream = r.id;
        f.gate_ref = g.gate_id;
        att.config.filters.push_back(f);
    }
    for (auto& [bridge, att] : by_bridge) c.psfp.push_back(std::move(att));
    c.notes.push_back("PSFP: each bridge checks frames from its end station against a stream gate open for +-" +
                      format_duration(d.psfp_slack) + " around the planned arrival; unmatched frames pass.");
}

FaultAction seven_stream_late_frame_fault() {
    FaultAction a;
    a.kind = FaultKind::ShiftFrame;
    a.stream_id = "A";
    a.near = 10ms;
    a.shift = 10us;
    return a;
}

// ---------------------------------------------------------------------------
// Bundle

namespace {

Expectation conservation() {
    return {"emitted = delivered + dropped + in flight for every stream",
            [](const RunResult& r) -> std::optional<std::string> {
                for (const auto& [id, s] : r.stats.per_stream) {
                    if (!s.conserved()) return "stream " + id + " does not balance";
                }
                return std::nullopt;
            }};
}

Expectation no_drops() {
    return {"no frame is dropped", [](const RunResult& r) -> std::optional<std::string> {
                if (r.stats.total.dropped() == 0) return std::nullopt;
                return std::to_string(r.stats.total.dropped()) + " drops";
            }};
}

Expectation drops_exactly(std::uint64_t n) {
    return {"exactly " + std::to_string(n) + " frame(s) dropped", [n](const RunResult& r) -> std::optional<std::string> {
                if (r.stats.total.dropped() == n) return std::nullopt;
                return std::to_string(r.stats.total.dropped()) + " drops";
            }};
}

// Bytes waiting at BR->L queue 7 right at each period boundary in [from, to).
Expectation boundary_occupancy(Nanos period, Nanos from, Nanos to, double expected) {
    return {"queue holds " + std::to_string(static_cast<long long>(expected)) + " B at every period boundary in [" +
                format_duration(from) + ", " + format_duration(to) + ")",
            [=](const RunResult& r) -> std::optional<std::string> {
                const auto series = occupancy_series(r.trace, kSingleLinkPort, 7);
                for (Nanos t = from; t < to; t += period) {
                    const double v = series.value_before(t);
                    if (v != expected) return "occupancy " + std::to_string(v) + " B at " + format_duration(t);
                }
                return std::nullopt;
            }};
}

Expectation tx_starts(const StreamId& stream, std::vector<std::pair<std::uint64_t, Nanos>> expected) {
    return {"stream " + stream + " transmission starts on " + kSingleLinkPort,
            [=](const RunResult& r) -> std::optional<std::string> {
                const auto port = r.trace.find(kSingleLinkPort);
                const auto sid = r.trace.find(stream);
                if (!port || !sid) return std::string("port or stream missing from trace");
                for (const auto& [seq, t] : expected) {
                    const auto it = std::find_if(r.trace.frame_events.begin(), r.trace.frame_events.end(),
                                                 [&](const FrameEvent& e) {
                                                     return e.kind == FrameEventKind::TxStart && e.location == *port &&
                                                            e.stream == *sid && e.seq == seq;
                                                 });
                    if (it == r.trace.frame_events.end()) return "seq " + std::to_string(seq) + " never transmitted";
                    if (it->time != t) {
                        return "seq " + std::to_string(seq) + " starts at " + format_duration(it->time) + ", expected " +
                               format_duration(t);
                    }
                }
                return std::nullopt;
            }};
}

Expectation max_latency_below(Nanos bound) {
    return {"every delivered frame has latency below " + format_duration(bound),
            [=](const RunResult& r) -> std::optional<std::string> {
                for (const auto& s : streams_in(r.trace)) {
                    for (const auto& l : latency_series(r.trace, s)) {
                        if (l.delivered && l.latency >= bound) {
                            return "stream " + s + " seq " + std::to_string(l.seq) + " latency " +
                                   format_duration(l.latency);
                        }
                    }
                }
                return std::nullopt;
            }};
}

Expectation latency_grows(Nanos fault, Nanos within) {
    return {"every stream exceeds 10x its fault-free latency within " + format_duration(within) + " of the fault",
            [=](const RunResult& r) -> std::optional<std::string> {
                for (const auto& s : streams_in(r.trace)) {
                    if (s.rfind("inj:", 0) == 0) continue;
                    const auto series = latency_series(r.trace, s);
                    Nanos baseline{0};
                    for (const auto& l : series) {
                        if (l.delivered && l.emitted < fault) baseline = std::max(baseline, l.latency);
                    }
                    const bool hit = std::any_of(series.begin(), series.end(), [&](const LatencySample& l) {
                        return l.delivered && l.emitted >= fault && l.emitted < fault + within &&
                               l.latency > 10 * baseline;
                    });
                    if (!hit) return "stream " + s + " stays below 10x " + format_duration(baseline);
                }
                return std::nullopt;
            }};
}

NetworkScenario make(const std::string& name) {
    if (name == "no_fault") {
        return {name, build_no_fault(),
                {conservation(), no_drops(), boundary_occupancy(30us, 30us, 3ms, 0.0),
                 tx_starts("magenta", {{0, 12us}, {1, 42us}}), tx_starts("blue", {{0, 20us}, {1, 50us}})}};
    }
    if (name == "early") {
        return {name, build_early(),
                {conservation(), no_drops(), tx_starts("blue", {{1, 42us}}), tx_starts("magenta", {{1, 46us}})}};
    }
    if (name == "missing") {
        return {name, build_missing(), {conservation(), no_drops(), tx_starts("blue", {{1, 42us}})}};
    }
    if (name == "additional") {
        return {name, build_additional(),
                {conservation(), no_drops(), boundary_occupancy(40us, 80us, 4400us, 500.0)}};
    }
    if (name == "late_frame") {
        return {name, build_late_frame(),
                {conservation(), no_drops(), tx_starts("magenta", {{0, 10us}, {1, 70us}, {2, 110us}}),
                 tx_starts("blue", {{0, 30us}, {1, 90us}, {2, 130us}})}};
    }
    if (name == "delayed_stream") {
        return {name, build_delayed_stream(),
                {conservation(), no_drops(), tx_starts("magenta", {{0, 30us}, {1, 70us}, {2, 110us}}),
                 tx_starts("blue", {{0, 50us}, {1, 90us}, {2, 130us}})}};
    }
    if (name == "continuous_increase") {
        return {name, build_continuous_increase(), {conservation(), no_drops()}};
    }
    if (name == "network_baseline") {
        auto c = build_seven_stream_network();
        return {name, c, {conservation(), no_drops(), max_latency_below(100us)}};
    }
    if (name == "network_late_frame") {
        auto c = build_seven_stream_network();
        c.name = name;
        c.scenario.actions.push_back(seven_stream_late_frame_fault());
        c.notes.push_back("Fault: stream A frame nearest 10 ms leaves 10 us late.");
        return {name, c, {conservation(), no_drops(), latency_grows(10ms, 500ms)}};
    }
    if (name == "network_late_frame_psfp") {
        auto c = build_seven_stream_network();
        c.name = name;
        add_seven_stream_psfp(c);
        c.scenario.actions.push_back(seven_stream_late_frame_fault());
        c.notes.push_back("Fault: stream A frame nearest 10 ms leaves 10 us late; B1 drops it at ingress.");
        return {name, c, {conservation(), drops_exactly(1), max_latency_below(100us)}};
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"no_fault",         "additional",         "late_frame",      "delayed_stream",    "early", "missing",
            "continuous_increase", "network_baseline", "network_late_frame", "network_late_frame_psfp"};
}

NetworkScenario bundled_scenario(const std::string& name) { return make(name); }

}  // namespace tsnsim
