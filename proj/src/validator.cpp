#include "tsnsim/validator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/errors.hpp"

namespace tsnsim {

namespace {

class Collector {
public:
    void add(std::string code, std::string message) { out_.push_back({std::move(code), std::move(message)}); }
    std::vector<Diagnostic> take() { return std::move(out_); }

private:
    std::vector<Diagnostic> out_;
};

std::string fmt(Nanos d) { return format_duration(d); }

struct Interval {
    Nanos start;
    Nanos end;
};

// Coverage of [0, cycle) by half-open intervals, in the order given.
void check_coverage(Collector& c, const std::string& what, const std::string& label, Nanos cycle,
                    const std::vector<Interval>& entries) {
    if (cycle <= Nanos::zero()) {
        c.add(what + " cycle", label + ": cycle_time must be positive");
        return;
    }
    if (entries.empty()) {
        c.add(what + " gap", label + ": no entries; [0, " + fmt(cycle) + ") uncovered");
        return;
    }
    bool bounds_ok = true;
    for (const auto& e : entries) {
        if (e.start < Nanos::zero() || e.end > cycle || e.start >= e.end) {
            c.add(what + " entry", label + ": entry [" + fmt(e.start) + ", " + fmt(e.end) +
                                       ") must satisfy 0 <= start < end <= " + fmt(cycle));
            bounds_ok = false;
        }
    }
    if (!bounds_ok) return;
    auto sorted = entries;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
    Nanos covered{0};
    for (const auto& e : sorted) {
        if (e.start > covered) {
            c.add(what + " gap", label + ": [" + fmt(covered) + ", " + fmt(e.start) + ") is not covered");
        } else if (e.start < covered) {
            c.add(what + " overlap",
                  label + ": entry [" + fmt(e.start) + ", " + fmt(e.end) + ") overlaps the previous entry");
        }
        covered = std::max(covered, e.end);
    }
    if (covered < cycle) c.add(what + " gap", label + ": [" + fmt(covered) + ", " + fmt(cycle) + ") is not covered");
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].start < entries[i - 1].start) {
            c.add(what + " order", label + ": entries are not in start order");
            break;
        }
    }
}

bool commensurable(Nanos a, Nanos b) {
    if (a <= Nanos::zero() || b <= Nanos::zero()) return true;  // reported elsewhere
    return a.count() % b.count() == 0 || b.count() % a.count() == 0;
}

void check_topology(Collector& c, const SimConfig& cfg) {
    const auto& topo = cfg.topology;
    std::set<NodeId> ids;
    for (const auto& n : topo.nodes) {
        if (n.id.empty()) c.add("node", "node with empty id");
        if (!ids.insert(n.id).second) c.add("duplicate node", "node '" + n.id + "' defined more than once");
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& l : topo.links) {
        const auto label = "link " + l.a + "-" + l.b;
        if (!topo.find_node(l.a)) c.add("link endpoint", label + ": unknown node '" + l.a + "'");
        if (!topo.find_node(l.b)) c.add("link endpoint", label + ": unknown node '" + l.b + "'");
        if (l.a == l.b) c.add("link endpoint", label + ": self loop");
        if (l.rate_bps <= 0) c.add("link rate", label + ": rate must be positive");
        if (l.propagation_delay < Nanos::zero()) c.add("link delay", label + ": negative propagation delay");
        const auto key = std::minmax(l.a, l.b);
        if (!seen.insert({key.first, key.second}).second) c.add("duplicate link", label + " defined more than once");
    }
}

void check_streams(Collector& c, const SimConfig& cfg) {
    const auto& topo = cfg.topology;
    std::set<StreamId> ids;
    for (const auto& s : cfg.streams) {
        const auto label = "stream '" + s.stream_id + "'";
        if (s.stream_id.empty()) c.add("stream", "stream with empty id");
        if (!ids.insert(s.stream_id).second) c.add("duplicate stream", label + " defined more than once");
        if (s.stream_id.rfind("inj:", 0) == 0) c.add("stream", label + ": the 'inj:' prefix is reserved");
        if (s.period <= Nanos::zero()) c.add("stream period", label + ": period must be positive");
        if (s.send_offset < Nanos::zero() || (s.period > Nanos::zero() && s.send_offset >= s.period)) {
            c.add("stream offset", label + ": send_offset " + fmt(s.send_offset) + " must lie in [0, period)");
        }
        if (s.frame_size < cfg.min_frame_size || s.frame_size > cfg.max_frame_size) {
            c.add("frame size", label + ": frame_size " + std::to_string(s.frame_size) + " outside [" +
                                    std::to_string(cfg.min_frame_size) + ", " + std::to_string(cfg.max_frame_size) + "]");
        }
        if (s.priority < 0 || s.priority >= kNumQueues) c.add("priority", label + ": priority must be 0..7");
        if (s.frames_per_period < 1) c.add("frames per period", label + ": frames_per_period must be >= 1");

        const Node* talker = topo.find_node(s.talker);
        const Node* listener = topo.find_node(s.listener);
        if (!talker) {
            c.add("path", label + ": unknown talker '" + s.talker + "'");
        } else if (talker->kind != NodeKind::EndStation) {
            c.add("path", label + ": talker '" + s.talker + "' is not an end station");
        }
        if (!listener) {
            c.add("path", label + ": unknown listener '" + s.listener + "'");
        } else if (listener->kind != NodeKind::EndStation) {
            c.add("path", label + ": listener '" + s.listener + "' is not an end station");
        }
        for (const auto& b : s.path) {
            const Node* n = topo.find_node(b);
            if (!n) {
                c.add("path", label + ": unknown bridge '" + b + "' in path");
            } else if (n->kind != NodeKind::Bridge) {
                c.add("path", label + ": '" + b + "' in path is not a bridge");
            }
        }
        const auto hops = s.hops();
        std::set<NodeId> visited;
        for (std::size_t i = 0; i < hops.size(); ++i) {
            if (!visited.insert(hops[i]).second) c.add("path loop", label + ": node '" + hops[i] + "' visited twice");
            if (i + 1 < hops.size() && !topo.find_link(hops[i], hops[i + 1])) {
                c.add("path link", label + ": no link " + hops[i] + "-" + hops[i + 1]);
            }
        }
    }
}

void check_forwarding(Collector& c, const SimConfig& cfg) {
    const auto& topo = cfg.topology;
    std::set<std::pair<NodeId, StreamId>> keys;
    for (const auto& f : topo.forwarding) {
        const auto label = "forwarding " + f.bridge + "/" + f.stream_id;
        const Node* b = topo.find_node(f.bridge);
        if (!b || b->kind != NodeKind::Bridge) c.add("forwarding", label + ": '" + f.bridge + "' is not a bridge");
        if (!cfg.find_stream(f.stream_id)) c.add("forwarding", label + ": unknown stream");
        if (!topo.find_link(f.bridge, f.next_hop)) {
            c.add("forwarding", label + ": next hop '" + f.next_hop + "' is not a neighbor");
        }
        if (!keys.insert({f.bridge, f.stream_id}).second) c.add("forwarding", label + ": duplicate entry");
    }
    for (const auto& s : cfg.streams) {
        const auto hops = s.hops();
        for (std::size_t i = 1; i + 1 < hops.size(); ++i) {
            const auto nh = topo.next_hop(hops[i], s.stream_id);
            if (!nh) {
                c.add("forwarding coverage", "stream '" + s.stream_id + "': no forwarding entry at '" + hops[i] + "'");
            } else if (*nh != hops[i + 1]) {
                c.add("forwarding mismatch", "stream '" + s.stream_id + "': '" + hops[i] + "' forwards to '" + *nh +
                                                 "' but the path continues to '" + hops[i + 1] + "'");
            }
        }
    }
}

void check_gcls(Collector& c, const SimConfig& cfg, std::optional<Nanos> hp) {
    std::set<PortKey> ports;
    for (const auto& pg : cfg.gcls) {
        const auto label = "GCL " + pg.port.name();
        if (!cfg.topology.find_link(pg.port.node, pg.port.neighbor)) c.add("GCL port", label + ": no such link");
        if (!ports.insert(pg.port).second) c.add("GCL port", label + ": defined more than once");
        std::vector<Interval> iv;
        for (const auto& e : pg.gcl.entries) iv.push_back({e.start, e.end});
        check_coverage(c, "GCL", label, pg.gcl.cycle_time, iv);
        if (hp && !commensurable(*hp, pg.gcl.cycle_time)) {
            c.add("GCL cycle", label + ": cycle " + fmt(pg.gcl.cycle_time) + " is not commensurable with hyperperiod " +
                                   fmt(*hp));
        }
    }
}

void check_psfp(Collector& c, const SimConfig& cfg, std::optional<Nanos> hp) {
    std::set<std::pair<NodeId, NodeId>> attach;
    for (const auto& a : cfg.psfp) {
        const auto label = "PSFP " + a.bridge + "/" + a.ingress;
        const Node* b = cfg.topology.find_node(a.bridge);
        if (!b || b->kind != NodeKind::Bridge) c.add("PSFP", label + ": '" + a.bridge + "' is not a bridge");
        if (a.ingress != "*" && !cfg.topology.find_link(a.bridge, a.ingress)) {
            c.add("PSFP", label + ": ingress '" + a.ingress + "' is not a neighbor");
        }
        if (!attach.insert({a.bridge, a.ingress}).second) c.add("PSFP", label + ": attached more than once");
        for (const auto& f : a.config.filters) {
            const auto fl = label + " filter " + std::to_string(f.order);
            if (!a.config.gates.count(f.gate_ref)) c.add("PSFP ref", fl + ": unknown gate '" + f.gate_ref + "'");
            if (f.meter_ref && !a.config.meters.count(*f.meter_ref)) {
                c.add("PSFP ref", fl + ": unknown meter '" + *f.meter_ref + "'");
            }
            if (f.match_priority && (*f.match_priority < 0 || *f.match_priority >= kNumQueues)) {
                c.add("PSFP filter", fl + ": priority must be 0..7");
            }
            if (f.max_sdu && *f.max_sdu <= 0) c.add("PSFP filter", fl + ": max_sdu must be positive");
        }
        for (const auto& [id, g] : a.config.gates) {
            const auto gl = label + " gate '" + id + "'";
            std::vector<Interval> iv;
            for (const auto& e : g.entries) {
                iv.push_back({e.start, e.end});
                if (e.ipv && (*e.ipv < 0 || *e.ipv >= kNumQueues)) c.add("PSFP gate", gl + ": ipv must be 0..7");
            }
            check_coverage(c, "stream gate", gl, g.cycle_time, iv);
            if (hp && !commensurable(*hp, g.cycle_time)) {
                c.add("stream gate cycle", gl + ": cycle " + fmt(g.cycle_time) +
                                               " is not commensurable with hyperperiod " + fmt(*hp));
            }
        }
        for (const auto& [id, m] : a.config.meters) {
            const auto ml = label + " meter '" + id + "'";
            if (m.cir < 0 || m.eir < 0 || m.cbs < 0 || m.ebs < 0) c.add("PSFP meter", ml + ": negative parameter");
        }
    }
}

void check_scenario(Collector& c, const SimConfig& cfg) {
    for (std::size_t i = 0; i < cfg.scenario.actions.size(); ++i) {
        const auto& a = cfg.scenario.actions[i];
        const auto label = "fault " + std::to_string(i) + " (" + to_string(a.kind) + ")";
        const StreamSpec* s = cfg.find_stream(a.stream_id);
        if (!s) {
            c.add("fault ref", label + ": unknown stream '" + a.stream_id + "'");
            continue;
        }
        const bool single = a.kind == FaultKind::DropFrame || a.kind == FaultKind::ShiftFrame;
        if (single && a.seq.has_value() == a.near.has_value()) {
            c.add("fault ref", label + ": exactly one of seq and near is required");
        }
        if (a.kind == FaultKind::ShiftFrame && s->period > Nanos::zero() &&
            (a.shift >= s->period || -a.shift >= s->period)) {
            c.add("fault shift", label + ": |shift| " + fmt(a.shift) + " must be below the period " + fmt(s->period));
        }
        if (a.kind == FaultKind::ShiftStream && a.shift + s->send_offset < Nanos::zero()) {
            c.add("fault shift", label + ": shift moves the first emission before t = 0");
        }
        if (a.kind == FaultKind::InjectFrame) {
            if (a.inject.time < Nanos::zero()) c.add("fault inject", label + ": negative time");
            if (a.inject.size < cfg.min_frame_size || a.inject.size > cfg.max_frame_size) {
                c.add("fault inject", label + ": size out of range");
            }
            if (a.inject.priority < 0 || a.inject.priority >= kNumQueues) {
                c.add("fault inject", label + ": priority must be 0..7");
            }
        }
    }

    // Single-frame actions after resolving `near`.
    std::set<std::pair<StreamId, std::uint64_t>> targets;
    FaultScenario resolved;
    try {
        resolved = resolve_targets(cfg.scenario, cfg.streams);
    } catch (const ConfigError&) {
        return;  // already reported above
    }
    for (const auto& a : resolved.actions) {
        if (a.kind != FaultKind::DropFrame && a.kind != FaultKind::ShiftFrame) continue;
        if (!a.seq) continue;
        if (!targets.insert({a.stream_id, *a.seq}).second) {
            c.add("fault conflict", "stream '" + a.stream_id + "' seq " + std::to_string(*a.seq) +
                                        " is the target of more than one single-frame action");
        }
        const StreamSpec* s = cfg.find_stream(a.stream_id);
        if (s && a.kind == FaultKind::ShiftFrame && s->period > Nanos::zero() && s->frames_per_period > 0) {
            const auto k = static_cast<std::int64_t>(*a.seq) / s->frames_per_period;
            if (s->period * k + s->send_offset + a.shift < Nanos::zero()) {
                c.add("fault shift", "stream '" + a.stream_id + "' seq " + std::to_string(*a.seq) +
                                         ": shifted emission is before t = 0");
            }
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_config(const SimConfig& cfg) {
    Collector c;
    if (cfg.sim_end <= Nanos::zero()) c.add("sim_end", "sim_end must be positive");
    if (cfg.queue_capacity < 0) c.add("queue capacity", "queue_capacity must be >= 0");
    if (cfg.processing_delay < Nanos::zero()) c.add("processing delay", "processing_delay must be >= 0");
    if (cfg.min_frame_size <= 0 || cfg.min_frame_size > cfg.max_frame_size) {
        c.add("frame size", "need 0 < min_frame_size <= max_frame_size");
    }

    check_topology(c, cfg);
    check_streams(c, cfg);
    check_forwarding(c, cfg);

    std::optional<Nanos> hp;
    const bool periods_ok = !cfg.streams.empty() && std::all_of(cfg.streams.begin(), cfg.streams.end(), [](const auto& s) {
                                return s.period > Nanos::zero();
                            });
    if (periods_ok) hp = hyperperiod(cfg.streams);
    check_gcls(c, cfg, hp);
    check_psfp(c, cfg, hp);
    check_scenario(c, cfg);
    return c.take();
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
    std::string out;
    for (const auto& d : diagnostics) {
        if (!out.empty()) out.push_back('\n');
        out += d.code + ": " + d.message;
    }
    return out;
}

// ---------------------------------------------------------------------------
// feasibility

FeasibilityReport check_feasibility(const SimConfig& config) {
    SimConfig cfg = config;
    cfg.scenario = {};

    auto diagnostics = validate_config(cfg);
    // sim_end is replaced below, so an unset one is not a problem here.
    std::erase_if(diagnostics, [](const Diagnostic& d) { return d.code == "sim_end"; });
    if (!diagnostics.empty()) throw ConfigError(format_diagnostics(diagnostics));

    // Stream periods and every gate cycle must align at the boundaries.
    const Nanos H = schedule_hyperperiod(cfg);
    if (H <= Nanos::zero()) throw ConfigError("nothing periodic to check: no streams and no gate schedules");
    // One extra hyperperiod so transmissions crossing 3H complete.
    cfg.sim_end = 4 * H;

    const auto result = run(cfg);
    const auto& log = result.trace;

    FeasibilityReport rep;
    rep.hyperperiod = H;
    rep.drops = result.stats.total.dropped();
    if (rep.drops > 0) rep.problems.push_back(std::to_string(rep.drops) + " frame(s) dropped");

    const Nanos from = H;
    const Nanos to = 3 * H;

    for (const auto& s : cfg.streams) {
        Nanos worst{0};
        std::uint64_t delivered = 0;
        for (const auto& sample : latency_series(log, s.stream_id)) {
            if (!sample.delivered || sample.emitted < from || sample.emitted >= to) continue;
            worst = std::max(worst, sample.latency);
            ++delivered;
        }
        rep.max_latency[s.stream_id] = worst;
        if (delivered == 0) rep.problems.push_back("stream '" + s.stream_id + "' delivered nothing after warm-up");
    }

    for (const auto& e : log.frame_events) {
        // Warm-up deferrals count too: a frame stuck at the head of its
        // queue from the first cycle on is never deferred again.
        if (e.kind == FrameEventKind::Defer && e.time < to) ++rep.slot_misses;
    }

    std::set<std::pair<std::string, int>> queues;
    for (const auto& e : log.frame_events) {
        if (e.kind == FrameEventKind::Enqueue) queues.insert({log.name(e.location), e.queue});
    }
    for (const auto& [port, q] : queues) {
        const auto series = occupancy_series(log, port, q);
        QueueBacklog b{port, q, static_cast<Bytes>(std::llround(series.peak(from, to))), {}};
        for (int k = 1; k <= 3; ++k) b.at_boundary.push_back(static_cast<Bytes>(std::llround(series.value_before(k * H))));
        const bool periodic = std::all_of(b.at_boundary.begin(), b.at_boundary.end(),
                                          [&](Bytes v) { return v == b.at_boundary.front(); });
        if (!periodic) {
            std::ostringstream ss;
            ss << "queue " << port << ":" << q << " does not settle at hyperperiod boundaries (";
            for (std::size_t i = 0; i < b.at_boundary.size(); ++i) ss << (i ? ", " : "") << b.at_boundary[i];
            ss << " bytes)";
            rep.problems.push_back(ss.str());
        }
        rep.backlog.push_back(std::move(b));
    }
    rep.feasible = rep.problems.empty();
    return rep;
}

std::string feasibility_json(const FeasibilityReport& r) {
    nlohmann::ordered_json j;
    j["feasible"] = r.feasible;
    j["hyperperiod_ns"] = r.hyperperiod.count();
    j["slot_misses"] = r.slot_misses;
    j["drops"] = r.drops;
    auto& lat = j["max_latency_ns"] = nlohmann::ordered_json::object();
    for (const auto& [id, v] : r.max_latency) lat[id] = v.count();
    auto& bl = j["queues"] = nlohmann::ordered_json::array();
    for (const auto& b : r.backlog) {
        bl.push_back({{"port", b.port}, {"queue", b.queue}, {"peak_bytes", b.peak}, {"boundary_bytes", b.at_boundary}});
    }
    j["problems"] = r.problems;
    return j.dump(2) + "\n";
}

std::string feasibility_text(const FeasibilityReport& r) {
    std::ostringstream ss;
    ss << (r.feasible ? "feasible" : "INFEASIBLE") << " (hyperperiod " << format_duration(r.hyperperiod) << ")\n";
    for (const auto& [id, v] : r.max_latency) ss << "  stream " << id << ": max latency " << format_duration(v) << "\n";
    for (const auto& b : r.backlog) ss << "  queue " << b.port << ":" << b.queue << ": peak " << b.peak << " B\n";
    ss << "  slot misses: " << r.slot_misses << "\n";
    ss << "  drops: " << r.drops << "\n";
    for (const auto& p : r.problems) ss << "  problem: " << p << "\n";
    return ss.str();
}

}  // namespace tsnsim
