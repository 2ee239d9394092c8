#include "tsnsim/trace.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace tsnsim {

namespace {

constexpr const char* kKindNames[] = {"emit", "arrive", "enqueue", "defer", "tx_start", "tx_end", "deliver", "drop"};

}  // namespace

const char* to_string(FrameEventKind k) { return kKindNames[static_cast<int>(k)]; }

FrameEventKind frame_event_kind_from_string(std::string_view s) {
    for (int i = 0; i < 8; ++i) {
        if (s == kKindNames[i]) return static_cast<FrameEventKind>(i);
    }
    throw QueryError("unknown frame event '" + std::string(s) + "'");
}

TraceLog::TraceLog() {
    names_.emplace_back();
    ids_.emplace("", 0);
}

std::uint32_t TraceLog::intern(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(std::string(name), id);
    return id;
}

std::optional<std::uint32_t> TraceLog::find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

bool operator==(const TraceLog& a, const TraceLog& b) {
    if (a.frame_events.size() != b.frame_events.size() || a.gate_events.size() != b.gate_events.size() ||
        a.meter_events.size() != b.meter_events.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.frame_events.size(); ++i) {
        const auto& x = a.frame_events[i];
        const auto& y = b.frame_events[i];
        if (x.time != y.time || x.seq != y.seq || x.kind != y.kind || x.queue != y.queue || x.size != y.size ||
            a.name(x.location) != b.name(y.location) || a.name(x.stream) != b.name(y.stream) ||
            a.name(x.detail) != b.name(y.detail)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.gate_events.size(); ++i) {
        const auto& x = a.gate_events[i];
        const auto& y = b.gate_events[i];
        if (x.time != y.time || x.queue != y.queue || x.open != y.open || a.name(x.port) != b.name(y.port)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.meter_events.size(); ++i) {
        const auto& x = a.meter_events[i];
        const auto& y = b.meter_events[i];
        if (x.time != y.time || x.seq != y.seq || x.color != y.color || a.name(x.meter) != b.name(y.meter) ||
            a.name(x.stream) != b.name(y.stream)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

// Index of the last point with time <= t, or -1.
std::ptrdiff_t last_at_or_before(const std::vector<OccupancyPoint>& pts, Nanos t) {
    auto it = std::upper_bound(pts.begin(), pts.end(), t, [](Nanos v, const OccupancyPoint& p) { return v < p.time; });
    return (it - pts.begin()) - 1;
}

double interpolate(const OccupancyPoint& a, const OccupancyPoint& b, Nanos t) {
    if (b.time == a.time) return b.bytes;
    const double frac = static_cast<double>((t - a.time).count()) / static_cast<double>((b.time - a.time).count());
    return a.bytes + (b.bytes - a.bytes) * frac;
}

}  // namespace

double OccupancySeries::value_at(Nanos t) const {
    const auto i = last_at_or_before(points, t);
    if (i < 0) return 0.0;
    const auto idx = static_cast<std::size_t>(i);
    if (points[idx].time == t || idx + 1 == points.size()) return points[idx].bytes;
    return interpolate(points[idx], points[idx + 1], t);
}

double OccupancySeries::value_before(Nanos t) const {
    auto it = std::lower_bound(points.begin(), points.end(), t,
                               [](const OccupancyPoint& p, Nanos v) { return p.time < v; });
    if (it == points.end()) return points.empty() ? 0.0 : points.back().bytes;
    if (it->time == t) return it->bytes;  // first point at t is the left limit
    if (it == points.begin()) return 0.0;
    return interpolate(*(it - 1), *it, t);
}

double OccupancySeries::peak(Nanos from, Nanos to) const {
    double best = value_at(from);
    for (const auto& p : points) {
        if (p.time >= from && p.time < to) best = std::max(best, p.bytes);
    }
    return best;
}

OccupancySeries occupancy_series(const TraceLog& log, const std::string& port, int queue,
                                 const std::optional<StreamId>& stream) {
    const auto port_id = log.find(port);
    std::optional<std::uint32_t> stream_id;
    if (stream) stream_id = log.find(*stream);

    OccupancySeries out{port, queue, stream, {}};

    std::vector<const FrameEvent*> events;
    bool seen = false;
    if (port_id) {
        for (const auto& e : log.frame_events) {
            if (e.location != *port_id || e.queue != queue) continue;
            if (e.kind != FrameEventKind::Enqueue && e.kind != FrameEventKind::TxStart &&
                e.kind != FrameEventKind::TxEnd) {
                continue;
            }
            seen = true;
            if (stream && (!stream_id || e.stream != *stream_id)) continue;
            events.push_back(&e);
        }
    }
    if (!seen) {
        // A gated port with no traffic is still a valid (flat) query.
        bool gated = false;
        if (port_id) {
            gated = std::any_of(log.gate_events.begin(), log.gate_events.end(),
                                [&](const GateEvent& g) { return g.port == *port_id && g.queue == queue; });
        }
        if (!gated) throw QueryError("no trace data for port '" + port + "' queue " + std::to_string(queue));
    }

    // Each transmission ramps down until its matching tx_end.
    std::map<std::pair<std::uint32_t, std::uint64_t>, Nanos> tx_end;
    for (const auto* e : events) {
        if (e->kind == FrameEventKind::TxEnd) tx_end[{e->stream, e->seq}] = e->time;
    }

    struct Ramp {
        Bytes size;
        Nanos start;
        Nanos end;
    };
    double waiting = 0.0;
    std::optional<Ramp> ramp;
    const auto value = [&](Nanos t) {
        double v = waiting;
        if (ramp && ramp->end > ramp->start) {
            v += static_cast<double>(ramp->size) * static_cast<double>((ramp->end - t).count()) /
                 static_cast<double>((ramp->end - ramp->start).count());
        }
        return v;
    };
    const auto push = [&](Nanos t, double v) {
        if (!out.points.empty() && out.points.back().time == t && out.points.back().bytes == v) return;
        // Drop a redundant middle point on a flat stretch.
        const auto n = out.points.size();
        if (n >= 2 && out.points[n - 1].bytes == v && out.points[n - 2].bytes == v && out.points[n - 1].time != t &&
            out.points[n - 2].time != out.points[n - 1].time) {
            out.points[n - 1].time = t;
            return;
        }
        out.points.push_back({t, v});
    };

    push(Nanos::zero(), 0.0);
    for (const auto* e : events) {
        const Nanos t = e->time;
        push(t, value(t));
        switch (e->kind) {
            case FrameEventKind::Enqueue:
                waiting += static_cast<double>(e->size);
                break;
            case FrameEventKind::TxStart: {
                waiting -= static_cast<double>(e->size);
                auto it = tx_end.find({e->stream, e->seq});
                if (it != tx_end.end()) {
                    ramp = Ramp{e->size, t, it->second};
                } else {
                    // Still on the wire when the trace ends.
                    ramp.reset();
                    waiting += static_cast<double>(e->size);
                }
                break;
            }
            case FrameEventKind::TxEnd:
                ramp.reset();
                break;
            default:
                break;
        }
        push(t, value(t));
    }
    return out;
}

std::vector<LatencySample> latency_series(const TraceLog& log, const StreamId& stream) {
    const auto id = log.find(stream);
    if (!id) throw QueryError("unknown stream '" + stream + "'");

    std::map<std::uint64_t, LatencySample> by_seq;
    std::map<std::uint64_t, Nanos> emitted;
    bool any = false;
    for (const auto& e : log.frame_events) {
        if (e.stream != *id) continue;
        any = true;
        switch (e.kind) {
            case FrameEventKind::Emit:
                emitted[e.seq] = e.time;
                break;
            case FrameEventKind::Deliver: {
                auto& s = by_seq[e.seq];
                s.seq = e.seq;
                s.emitted = emitted.count(e.seq) ? emitted[e.seq] : Nanos::zero();
                s.delivered = e.time;
                s.latency = e.time - s.emitted;
                break;
            }
            case FrameEventKind::Drop: {
                auto& s = by_seq[e.seq];
                s.seq = e.seq;
                s.emitted = emitted.count(e.seq) ? emitted[e.seq] : Nanos::zero();
                s.dropped = true;
                s.drop_reason = log.name(e.detail);
                break;
            }
            default:
                break;
        }
    }
    if (!any) throw QueryError("unknown stream '" + stream + "'");

    std::vector<LatencySample> out;
    out.reserve(by_seq.size());
    for (auto& [seq, s] : by_seq) out.push_back(std::move(s));
    return out;
}

std::vector<StreamId> streams_in(const TraceLog& log) {
    std::vector<StreamId> out;
    std::vector<bool> seen;
    for (const auto& e : log.frame_events) {
        if (e.kind != FrameEventKind::Emit) continue;
        if (e.stream >= seen.size()) seen.resize(e.stream + 1, false);
        if (seen[e.stream]) continue;
        seen[e.stream] = true;
        out.push_back(log.name(e.stream));
    }
    return out;
}

std::vector<std::pair<Nanos, bool>> gate_band(const TraceLog& log, const std::string& port, int queue) {
    std::vector<std::pair<Nanos, bool>> out;
    const auto id = log.find(port);
    if (!id) return out;
    for (const auto& g : log.gate_events) {
        if (g.port == *id && g.queue == queue) out.emplace_back(g.time, g.open);
    }
    return out;
}

}  // namespace tsnsim
