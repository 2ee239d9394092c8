#include "tsnsim/psfp.hpp"

#include <algorithm>

#include "tsnsim/errors.hpp"

namespace tsnsim {

namespace {

const StreamGateEntry* entry_at(const StreamGate& gate, Nanos phase) {
    for (const auto& e : gate.entries) {
        if (phase >= e.start && phase < e.end) return &e;
    }
    return nullptr;
}

}  // namespace

StreamGateState stream_gate_state_at(const StreamGate& gate, Nanos t) {
    if (gate.cycle_time <= Nanos::zero()) return {};
    const auto* e = entry_at(gate, positive_mod(t - gate.base_time, gate.cycle_time));
    if (e == nullptr || !e->open) return {false, std::nullopt};
    return {true, e->ipv};
}

Nanos next_stream_gate_change(const StreamGate& gate, Nanos t) {
    if (gate.cycle_time <= Nanos::zero() || gate.entries.empty()) return kNever;
    const auto same = [](const StreamGateState& a, const StreamGateState& b) {
        return a.open == b.open && (!a.open || a.ipv == b.ipv);
    };
    const StreamGateState now = stream_gate_state_at(gate, t);

    // Candidate boundaries are entry starts and ends; scan one cycle ahead.
    std::vector<Nanos> bounds;
    for (const auto& e : gate.entries) {
        bounds.push_back(e.start);
        bounds.push_back(e.end);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    const Nanos phase = positive_mod(t - gate.base_time, gate.cycle_time);
    const Nanos cycle_start = t - phase;
    for (int wrap = 0; wrap <= 1; ++wrap) {
        for (Nanos b : bounds) {
            const Nanos abs = cycle_start + gate.cycle_time * wrap + b;
            if (abs <= t) continue;
            if (abs > t + gate.cycle_time) return kNever;
            if (!same(stream_gate_state_at(gate, abs), now)) return abs;
        }
    }
    return kNever;
}

const char* to_string(Color c) {
    switch (c) {
        case Color::Green:
            return "green";
        case Color::Yellow:
            return "yellow";
        case Color::Red:
            return "red";
    }
    return "?";
}

const char* to_string(PsfpDropReason r) {
    switch (r) {
        case PsfpDropReason::MaxSdu:
            return "psfp_max_sdu";
        case PsfpDropReason::GateClosed:
            return "psfp_gate_closed";
        case PsfpDropReason::MeterRed:
            return "psfp_meter_red";
        case PsfpDropReason::MeterYellow:
            return "psfp_meter_yellow";
        case PsfpDropReason::NoMatch:
            return "psfp_no_match";
    }
    return "?";
}

// ---------------------------------------------------------------------------

FlowMeter::FlowMeter(FlowMeterParams params, Nanos start)
    : params_(std::move(params)),
      committed_(static_cast<__int128>(params_.cbs) * kUnitsPerByte),
      excess_(static_cast<__int128>(params_.ebs) * kUnitsPerByte),
      last_update_(start) {}

void FlowMeter::set_tokens(Bytes committed, Bytes excess) {
    committed_ = static_cast<__int128>(std::clamp<Bytes>(committed, 0, params_.cbs)) * kUnitsPerByte;
    excess_ = static_cast<__int128>(std::clamp<Bytes>(excess, 0, params_.ebs)) * kUnitsPerByte;
}

Color meter_frame(FlowMeter& meter, Bytes size, Nanos t) {
    if (t < meter.last_update_) {
        throw InternalError("meter '" + meter.params_.meter_id + "' queried backwards in time");
    }
    const __int128 dt = (t - meter.last_update_).count();
    const __int128 c_cap = static_cast<__int128>(meter.params_.cbs) * FlowMeter::kUnitsPerByte;
    const __int128 e_cap = static_cast<__int128>(meter.params_.ebs) * FlowMeter::kUnitsPerByte;
    meter.committed_ = std::min(c_cap, meter.committed_ + meter.params_.cir * dt);
    meter.excess_ = std::min(e_cap, meter.excess_ + meter.params_.eir * dt);
    meter.last_update_ = t;

    const __int128 need = static_cast<__int128>(size) * FlowMeter::kUnitsPerByte;
    if (need <= meter.committed_) {
        meter.committed_ -= need;
        return Color::Green;
    }
    if (need <= meter.excess_) {
        meter.excess_ -= need;
        return Color::Yellow;
    }
    return Color::Red;
}

// ---------------------------------------------------------------------------

Psfp::Psfp(PsfpConfig config) : config_(std::move(config)), filters_(config_.filters) {
    std::stable_sort(filters_.begin(), filters_.end(),
                     [](const StreamFilter& a, const StreamFilter& b) { return a.order < b.order; });
    counters_.resize(filters_.size());
    for (const auto& f : filters_) {
        if (!config_.gates.contains(f.gate_ref)) {
            throw ConfigError("stream filter references unknown gate '" + f.gate_ref + "'");
        }
        if (f.meter_ref && !config_.meters.contains(*f.meter_ref)) {
            throw ConfigError("stream filter references unknown meter '" + *f.meter_ref + "'");
        }
    }
    for (const auto& [id, params] : config_.meters) meters_.emplace(id, FlowMeter(params));
}

const FlowMeter* Psfp::meter(const std::string& id) const {
    auto it = meters_.find(id);
    return it == meters_.end() ? nullptr : &it->second;
}

FilterVerdict Psfp::filter_frame(const Frame& frame, Nanos t) {
    FilterVerdict v;
    v.effective_priority = frame.priority;

    // The bridge identifies frames by what is on the wire, so injected
    // frames match their host stream's filters.
    const StreamId& handle = frame.route.empty() ? frame.stream_id : frame.route;

    std::size_t i = 0;
    for (; i < filters_.size(); ++i) {
        const auto& f = filters_[i];
        if (f.match_stream && *f.match_stream != handle) continue;
        if (f.match_priority && *f.match_priority != frame.priority) continue;
        break;
    }
    if (i == filters_.size()) {
        v.pass = !config_.fail_closed;
        v.reason = PsfpDropReason::NoMatch;
        return v;
    }

    const auto& f = filters_[i];
    auto& c = counters_[i];
    v.filter_index = static_cast<int>(i);
    ++c.matched;

    const auto drop = [&](PsfpDropReason r) {
        v.pass = false;
        v.reason = r;
        ++c.dropped;
        return v;
    };

    if (f.max_sdu && frame.size > *f.max_sdu) return drop(PsfpDropReason::MaxSdu);

    const auto gate = stream_gate_state_at(config_.gates.at(f.gate_ref), t);
    if (!gate.open) return drop(PsfpDropReason::GateClosed);
    if (gate.ipv) v.effective_priority = *gate.ipv;

    if (f.meter_ref) {
        auto& meter = meters_.at(*f.meter_ref);
        const Color color = meter_frame(meter, frame.size, t);
        v.meter_id = *f.meter_ref;
        v.color = color;
        if (color == Color::Red) return drop(PsfpDropReason::MeterRed);
        if (color == Color::Yellow && meter.params().drop_yellow) return drop(PsfpDropReason::MeterYellow);
    }

    ++c.passed;
    v.pass = true;
    return v;
}

}  // namespace tsnsim
