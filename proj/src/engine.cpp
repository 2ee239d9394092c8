#include "tsnsim/engine.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "tsnsim/errors.hpp"
#include "tsnsim/psfp.hpp"
#include "tsnsim/tas.hpp"
#include "tsnsim/validator.hpp"

namespace tsnsim {

void EventQueue::schedule(Event e) {
    if (e.time < now_) {
        throw InternalError("event scheduled in the past: t=" + std::to_string(e.time.count()) +
                            "ns < now=" + std::to_string(now_.count()) + "ns");
    }
    e.seq = next_seq_++;
    heap_.push(e);
}

Event EventQueue::pop() {
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    return e;
}

std::vector<Emission> emit_talker_frames(const StreamSpec& stream, const FaultScenario& scenario, Nanos until) {
    std::vector<Emission> base;
    if (stream.period > Nanos::zero()) {
        std::uint64_t seq = 0;
        for (Nanos t = stream.send_offset; t < until; t += stream.period) {
            for (int j = 0; j < stream.frames_per_period; ++j) {
                Frame f;
                f.stream_id = stream.stream_id;
                f.seq = seq++;
                f.size = stream.frame_size;
                f.priority = stream.priority;
                f.created_at = t;
                f.route = stream.stream_id;
                base.push_back(Emission{t, std::move(f)});
            }
        }
    }
    FaultScenario own;
    for (const auto& a : scenario.actions) {
        if (a.stream_id == stream.stream_id) own.actions.push_back(a);
    }
    return apply(own, std::move(base), std::span<const StreamSpec>(&stream, 1));
}

namespace {

constexpr std::uint32_t kAnyIngress = ~0U;

const char* kDropOverflow = "overflow";
const char* kDropForwarding = "forwarding_error";

struct NodeInfo {
    NodeId id;
    NodeKind kind;
    std::uint32_t name;  // interned
};

struct FrameSlot {
    Frame frame;
    std::uint32_t stream_name = 0;  // interned
    std::uint32_t talker_port = 0;
    int last_deferred_port = -1;
    bool emitted = false;
    bool done = false;
};

struct PortInfo {
    EgressPort port;
    std::uint32_t owner;     // node index
    std::uint32_t neighbor;  // node index
    Nanos propagation{0};
    std::uint32_t name;  // interned
    GateVector gates = kAllOpen;
    bool touched = false;
    std::uint8_t used_queues = 0;
};

struct StreamGateRef {
    std::size_t psfp;
    std::string gate_id;
    std::uint32_t name;  // interned
    StreamGateState state;
};

class Simulator {
public:
    Simulator(const SimConfig& config, const RunOptions& options) : cfg_(config), opts_(options) {}

    RunResult run();

private:
    void build();
    void schedule_emissions();
    Nanos emission_horizon(const StreamSpec& s) const;

    void on_talker_emit(const Event& e);
    void on_tx_complete(const Event& e);
    void on_frame_arrival(const Event& e);
    void on_gate_transition(const Event& e);
    void on_psfp_gate_transition(const Event& e);

    void enqueue(std::uint32_t port, std::uint32_t frame, int queue);
    void try_transmit(std::uint32_t port);
    void drop(std::uint32_t frame, std::uint32_t location, int queue, const char* reason);
    void finish(std::uint32_t frame);
    void record(FrameEventKind kind, std::uint32_t frame, std::uint32_t location, int queue,
                std::uint32_t detail = 0);
    void probe();

    StreamStats& stats_for(std::uint32_t frame) { return result_.stats.per_stream[frames_[frame].frame.stream_id]; }
    Nanos now() const { return events_.now(); }

    const SimConfig& cfg_;
    RunOptions opts_;
    RunResult result_;
    EventQueue events_;

    std::vector<NodeInfo> nodes_;
    std::map<NodeId, std::uint32_t> node_index_;
    std::vector<PortInfo> ports_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> port_index_;  // (owner, neighbor)
    std::map<std::pair<std::uint32_t, StreamId>, std::uint32_t> forwarding_;         // (bridge, route) -> port
    std::map<StreamId, std::uint32_t> listener_of_;                                  // route -> node
    std::map<StreamId, std::uint32_t> first_port_of_;                                // route -> talker port

    std::vector<Psfp> psfp_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> psfp_index_;  // (bridge, ingress)
    std::vector<StreamGateRef> stream_gates_;

    std::vector<FrameSlot> frames_;
};

void Simulator::build() {
    auto& trace = result_.trace;
    for (const auto& n : cfg_.topology.nodes) {
        node_index_.emplace(n.id, static_cast<std::uint32_t>(nodes_.size()));
        nodes_.push_back({n.id, n.kind, trace.intern(n.id)});
    }
    const auto node = [&](const NodeId& id) { return node_index_.at(id); };

    ports_.reserve(cfg_.topology.links.size() * 2);
    for (const auto& l : cfg_.topology.links) {
        for (const auto& [from, to] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
            PortKey key{from, to};
            std::optional<GateControlList> gcl;
            if (const auto* g = cfg_.gcl_for(key)) gcl = *g;
            const auto idx = static_cast<std::uint32_t>(ports_.size());
            const auto name = trace.intern(key.name());
            ports_.push_back(PortInfo{EgressPort(key, l.rate_bps, std::move(gcl), cfg_.include_l1_overhead,
                                                 cfg_.queue_capacity),
                                      node(from), node(to), l.propagation_delay, name});
            port_index_.emplace(std::pair{node(from), node(to)}, idx);
        }
    }

    for (const auto& f : cfg_.topology.forwarding) {
        auto it = port_index_.find({node(f.bridge), node(f.next_hop)});
        if (it != port_index_.end()) forwarding_.emplace(std::pair{node(f.bridge), f.stream_id}, it->second);
    }
    for (const auto& s : cfg_.streams) {
        const auto hops = s.hops();
        listener_of_[s.stream_id] = node(s.listener);
        first_port_of_[s.stream_id] = port_index_.at({node(hops[0]), node(hops[1])});
    }

    for (const auto& att : cfg_.psfp) {
        const std::uint32_t ingress = att.ingress == "*" ? kAnyIngress : node(att.ingress);
        psfp_index_.emplace(std::pair{node(att.bridge), ingress}, psfp_.size());
        psfp_.emplace_back(att.config);
        for (const auto& [id, gate] : att.config.gates) {
            const std::string name = att.bridge + "/psfp/" + (att.ingress == "*" ? std::string("any") : att.ingress) +
                                     "/" + id;
            stream_gates_.push_back({psfp_.size() - 1, id, trace.intern(name), {}});
        }
    }
}

Nanos Simulator::emission_horizon(const StreamSpec& s) const {
    Nanos horizon = cfg_.sim_end + Nanos{1};
    Nanos max_shift{0};
    for (const auto& a : cfg_.scenario.actions) {
        if (a.stream_id != s.stream_id) continue;
        max_shift = std::max(max_shift, a.shift < Nanos::zero() ? -a.shift : a.shift);
        if (a.seq && s.frames_per_period > 0) {
            const auto k = static_cast<std::int64_t>(*a.seq / static_cast<std::uint64_t>(s.frames_per_period));
            horizon = std::max(horizon, s.send_offset + s.period * (k + 1));
        }
        if (a.near) horizon = std::max(horizon, *a.near + s.period);
    }
    return horizon + max_shift + s.period;
}

void Simulator::schedule_emissions() {
    auto& trace = result_.trace;
    for (const auto& s : cfg_.streams) {
        auto emissions = emit_talker_frames(s, cfg_.scenario, emission_horizon(s));
        for (auto& em : emissions) {
            if (em.time < Nanos::zero() || em.time > cfg_.sim_end) continue;
            const auto handle = static_cast<std::uint32_t>(frames_.size());
            FrameSlot slot;
            slot.stream_name = trace.intern(em.frame.stream_id);
            slot.talker_port = first_port_of_.at(em.frame.route);
            slot.frame = std::move(em.frame);
            frames_.push_back(std::move(slot));
            events_.schedule({em.time, EventKind::TalkerEmit, 0, 0, handle, 0});
        }
    }
}

void Simulator::record(FrameEventKind kind, std::uint32_t frame, std::uint32_t location, int queue,
                       std::uint32_t detail) {
    const auto& slot = frames_[frame];
    result_.trace.frame_events.push_back(FrameEvent{now(), location, slot.stream_name, slot.frame.seq, kind,
                                                    static_cast<std::int8_t>(queue), slot.frame.size, detail});
}

void Simulator::finish(std::uint32_t frame) { frames_[frame].done = true; }

void Simulator::drop(std::uint32_t frame, std::uint32_t location, int queue, const char* reason) {
    record(FrameEventKind::Drop, frame, location, queue, result_.trace.intern(reason));
    finish(frame);
}

void Simulator::enqueue(std::uint32_t port, std::uint32_t frame, int queue) {
    auto& p = ports_[port];
    p.touched = true;
    p.used_queues |= static_cast<std::uint8_t>(1U << queue);
    const auto result = p.port.enqueue(QueuedFrame{frame, frames_[frame].frame.size}, queue);
    if (result == EnqueueResult::DroppedOverflow) {
        ++stats_for(frame).dropped_overflow;
        drop(frame, p.name, queue, kDropOverflow);
        return;
    }
    record(FrameEventKind::Enqueue, frame, p.name, queue);
    try_transmit(port);
}

void Simulator::try_transmit(std::uint32_t port) {
    auto& p = ports_[port];
    const auto attempt = p.port.try_transmit(now());
    for (const auto& d : attempt.deferred) {
        auto& slot = frames_[d.handle];
        if (slot.last_deferred_port == static_cast<int>(port)) continue;
        slot.last_deferred_port = static_cast<int>(port);
        ++result_.stats.guard_deferrals;
        int q = 0;
        for (int k = 0; k < kNumQueues; ++k) {
            if (!p.port.queue(k).empty() && p.port.queue(k).front().handle == d.handle) q = k;
        }
        record(FrameEventKind::Defer, d.handle, p.name, q);
    }
    if (attempt.started) {
        const auto& tx = *attempt.started;
        record(FrameEventKind::TxStart, tx.frame.handle, p.name, tx.queue);
        events_.schedule({tx.end, EventKind::TxComplete, 0, port, tx.frame.handle, 0});
    }
}

void Simulator::on_talker_emit(const Event& e) {
    auto& slot = frames_[e.frame];
    slot.emitted = true;
    ++stats_for(e.frame).emitted;
    const auto port = slot.talker_port;
    record(FrameEventKind::Emit, e.frame, nodes_[ports_[port].owner].name, -1);
    enqueue(port, e.frame, slot.frame.priority);
}

void Simulator::on_tx_complete(const Event& e) {
    auto& p = ports_[e.target];
    const TxStart done = p.port.complete(now());
    record(FrameEventKind::TxEnd, done.frame.handle, p.name, done.queue);
    events_.schedule({now() + p.propagation, EventKind::FrameArrival, 0, p.neighbor, done.frame.handle, p.owner});
    try_transmit(e.target);
}

void Simulator::on_frame_arrival(const Event& e) {
    const std::uint32_t frame = e.frame;
    auto& slot = frames_[frame];
    const auto& node = nodes_[e.target];
    slot.frame.arrivals.push_back({node.id, now()});

    if (node.kind == NodeKind::EndStation) {
        auto it = listener_of_.find(slot.frame.route);
        if (it != listener_of_.end() && it->second == e.target) {
            record(FrameEventKind::Deliver, frame, node.name, -1);
            ++stats_for(frame).delivered;
            finish(frame);
        } else {
            ++stats_for(frame).dropped_forwarding;
            drop(frame, node.name, -1, kDropForwarding);
        }
        return;
    }

    record(FrameEventKind::Arrive, frame, node.name, -1);

    int queue = slot.frame.priority;
    auto pit = psfp_index_.find({e.target, e.aux});
    if (pit == psfp_index_.end()) pit = psfp_index_.find({e.target, kAnyIngress});
    if (pit != psfp_index_.end()) {
        const auto verdict = psfp_[pit->second].filter_frame(slot.frame, now());
        if (verdict.color) {
            result_.trace.meter_events.push_back(
                MeterEvent{now(), result_.trace.intern(node.id + "/" + *verdict.meter_id), slot.stream_name,
                           slot.frame.seq, *verdict.color});
        }
        if (!verdict.pass) {
            ++stats_for(frame).dropped_psfp;
            drop(frame, node.name, -1, to_string(verdict.reason));
            return;
        }
        queue = verdict.effective_priority;
    }

    auto fit = forwarding_.find({e.target, slot.frame.route});
    if (fit == forwarding_.end()) {
        ++stats_for(frame).dropped_forwarding;
        drop(frame, node.name, -1, kDropForwarding);
        return;
    }

    if (cfg_.processing_delay > Nanos::zero()) {
        events_.schedule({now() + cfg_.processing_delay, EventKind::FrameArrival, 0, fit->second, frame,
                          static_cast<std::uint32_t>(queue), 1});
        return;
    }
    enqueue(fit->second, frame, queue);
}

void Simulator::on_gate_transition(const Event& e) {
    auto& p = ports_[e.target];
    const GateVector gates = p.port.gates_at(now());
    for (int q = 0; q < kNumQueues; ++q) {
        if (gate_open(gates, q) != gate_open(p.gates, q)) {
            result_.trace.gate_events.push_back({now(), p.name, static_cast<std::int8_t>(q), gate_open(gates, q)});
        }
    }
    p.gates = gates;
    try_transmit(e.target);
    const Nanos next = next_gate_change(*p.port.gcl(), now());
    if (next != kNever && next <= cfg_.sim_end) events_.schedule({next, EventKind::GateTransition, 0, e.target, 0, 0});
}

void Simulator::on_psfp_gate_transition(const Event& e) {
    auto& g = stream_gates_[e.target];
    const auto& gate = psfp_[g.psfp].config().gates.at(g.gate_id);
    g.state = stream_gate_state_at(gate, now());
    result_.trace.gate_events.push_back(
        {now(), g.name, static_cast<std::int8_t>(g.state.ipv.value_or(-1)), g.state.open});
    const Nanos next = next_stream_gate_change(gate, now());
    if (next != kNever && next <= cfg_.sim_end) {
        events_.schedule({next, EventKind::PsfpGateTransition, 0, e.target, 0, 0});
    }
}

void Simulator::probe() {
    for (const auto& p : ports_) {
        if (!p.touched) continue;
        const auto& flight = p.port.in_flight();
        for (int q = 0; q < kNumQueues; ++q) {
            const bool on_wire = flight && flight->queue == q;
            if (!gate_open(p.used_queues, q)) continue;
            double remaining = 0.0;
            if (on_wire) {
                const double span = static_cast<double>((flight->end - flight->start).count());
                remaining = static_cast<double>(flight->frame.size) *
                            static_cast<double>((flight->end - now()).count()) / span;
            }
            result_.probes.push_back({now(), p.port.key().name(), q, p.port.occupancy(q), remaining});
        }
    }
}

RunResult Simulator::run() {
    build();

    for (std::uint32_t i = 0; i < ports_.size(); ++i) {
        auto& p = ports_[i];
        if (!p.port.gated()) continue;
        p.gates = p.port.gates_at(Nanos::zero());
        for (int q = 0; q < kNumQueues; ++q) {
            result_.trace.gate_events.push_back({Nanos::zero(), p.name, static_cast<std::int8_t>(q), gate_open(p.gates, q)});
        }
        const Nanos next = next_gate_change(*p.port.gcl(), Nanos::zero());
        if (next != kNever && next <= cfg_.sim_end) events_.schedule({next, EventKind::GateTransition, 0, i, 0, 0});
    }
    for (std::uint32_t i = 0; i < stream_gates_.size(); ++i) {
        events_.schedule({Nanos::zero(), EventKind::PsfpGateTransition, 0, i, 0, 0});
    }

    schedule_emissions();
    events_.schedule({cfg_.sim_end, EventKind::SimEnd, 0, 0, 0, 0});

    while (!events_.empty()) {
        const Event e = events_.pop();
        ++result_.stats.events_dispatched;
        if (e.kind == EventKind::SimEnd) break;
        switch (e.kind) {
            case EventKind::TalkerEmit:
                on_talker_emit(e);
                break;
            case EventKind::TxComplete:
                on_tx_complete(e);
                break;
            case EventKind::FrameArrival:
                if (e.stage == 1) {
                    enqueue(e.target, e.frame, static_cast<int>(e.aux));
                } else {
                    on_frame_arrival(e);
                }
                break;
            case EventKind::GateTransition:
                on_gate_transition(e);
                break;
            case EventKind::PsfpGateTransition:
                on_psfp_gate_transition(e);
                break;
            case EventKind::SimEnd:
                break;
        }
        if (opts_.occupancy_probe) probe();
    }

    for (std::uint32_t i = 0; i < frames_.size(); ++i) {
        if (frames_[i].emitted && !frames_[i].done) ++stats_for(i).in_flight;
    }
    auto& total = result_.stats.total;
    for (const auto& [id, s] : result_.stats.per_stream) {
        total.emitted += s.emitted;
        total.delivered += s.delivered;
        total.dropped_psfp += s.dropped_psfp;
        total.dropped_overflow += s.dropped_overflow;
        total.dropped_forwarding += s.dropped_forwarding;
        total.in_flight += s.in_flight;
    }
    return std::move(result_);
}

}  // namespace

RunResult run(const SimConfig& config, const RunOptions& options) {
    const auto diagnostics = validate_config(config);
    if (!diagnostics.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& d : diagnostics) msg += "\n  " + d.code + ": " + d.message;
        throw ConfigError(msg);
    }
    return Simulator(config, options).run();
}

}  // namespace tsnsim
