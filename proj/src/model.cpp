#include "tsnsim/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <stdexcept>

#include "tsnsim/errors.hpp"

namespace tsnsim {

// ---------------------------------------------------------------------------
// time

Nanos transmission_time(Bytes size, BitRate rate, bool include_l1_overhead) {
    if (rate <= 0) throw std::invalid_argument("link rate must be positive");
    const Bytes wire = size + (include_l1_overhead ? kL1OverheadBytes : 0);
    const __int128 bits_ns = static_cast<__int128>(wire) * 8 * 1'000'000'000;
    const __int128 ns = (bits_ns + rate - 1) / rate;
    return Nanos{static_cast<std::int64_t>(ns)};
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits "<integer><suffix>" and returns the integer part.
std::int64_t leading_integer(std::string_view text, std::string_view& suffix) {
    text = trim(text);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == text.data()) {
        throw std::invalid_argument("expected a number in '" + std::string(text) + "'");
    }
    suffix = trim(std::string_view(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr)));
    return value;
}

}  // namespace

Nanos parse_duration(std::string_view text) {
    std::string_view unit;
    const std::int64_t value = leading_integer(text, unit);
    std::int64_t scale = 0;
    if (unit.empty() || unit == "ns") {
        scale = 1;
    } else if (unit == "us" || unit == "µs") {
        scale = 1'000;
    } else if (unit == "ms") {
        scale = 1'000'000;
    } else if (unit == "s") {
        scale = 1'000'000'000;
    } else {
        throw std::invalid_argument("unknown duration unit '" + std::string(unit) + "' in '" +
                                    std::string(text) + "'");
    }
    return Nanos{value * scale};
}

BitRate parse_rate(std::string_view text) {
    std::string_view unit;
    const std::int64_t value = leading_integer(text, unit);
    if (unit.empty() || unit == "bps") return value;
    if (unit == "kbps") return value * 1'000;
    if (unit == "Mbps") return value * 1'000'000;
    if (unit == "Gbps") return value * 1'000'000'000;
    throw std::invalid_argument("unknown rate unit '" + std::string(unit) + "'");
}

std::string format_duration(Nanos d) {
    const auto n = d.count();
    if (n != 0) {
        if (n % 1'000'000'000 == 0) return std::to_string(n / 1'000'000'000) + "s";
        if (n % 1'000'000 == 0) return std::to_string(n / 1'000'000) + "ms";
        if (n % 1'000 == 0) return std::to_string(n / 1'000) + "us";
    }
    return std::to_string(n) + "ns";
}

// ---------------------------------------------------------------------------
// topology / streams

const Node* Topology::find_node(const NodeId& id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const Link* Topology::find_link(const NodeId& x, const NodeId& y) const {
    auto it = std::find_if(links.begin(), links.end(), [&](const Link& l) { return l.connects(x, y); });
    return it == links.end() ? nullptr : &*it;
}

std::optional<NodeId> Topology::next_hop(const NodeId& bridge, const StreamId& stream) const {
    for (const auto& e : forwarding) {
        if (e.bridge == bridge && e.stream_id == stream) return e.next_hop;
    }
    return std::nullopt;
}

std::vector<NodeId> StreamSpec::hops() const {
    std::vector<NodeId> out;
    out.reserve(path.size() + 2);
    out.push_back(talker);
    out.insert(out.end(), path.begin(), path.end());
    out.push_back(listener);
    return out;
}

Nanos hyperperiod(std::span<const StreamSpec> streams) {
    if (streams.empty()) throw ConfigError("hyperperiod of an empty stream set");
    std::int64_t l = 1;
    for (const auto& s : streams) {
        if (s.period <= Nanos::zero()) {
            throw ConfigError("stream '" + s.stream_id + "' has non-positive period");
        }
        l = std::lcm(l, s.period.count());
    }
    return Nanos{l};
}

// ---------------------------------------------------------------------------
// gate control lists

GateControlList GateControlList::always(GateVector gates, Nanos cycle) {
    return GateControlList{cycle, {GclEntry{Nanos::zero(), cycle, gates}}, Nanos::zero()};
}

namespace {

// Index of the entry containing `phase`, or -1 if the phase falls in a gap.
int entry_at(const GateControlList& gcl, Nanos phase) {
    const auto& es = gcl.entries;
    auto it = std::upper_bound(es.begin(), es.end(), phase,
                               [](Nanos p, const GclEntry& e) { return p < e.start; });
    if (it == es.begin()) return -1;
    --it;
    if (phase >= it->end) return -1;
    return static_cast<int>(it - es.begin());
}

// Walks the schedule forward from t as a sequence of (absolute start, gates)
// segments, gaps included as closed segments, for at most one full cycle
// plus the segment containing t. Calls visit(start, gates) for every segment
// starting after t; stops when visit returns true.
template <typename Visit>
Nanos walk_segments(const GateControlList& gcl, Nanos t, Visit visit) {
    if (gcl.cycle_time <= Nanos::zero() || gcl.entries.empty()) return kNever;
    const Nanos phase = positive_mod(t - gcl.base_time, gcl.cycle_time);
    const Nanos cycle_start = t - phase;

    // Flatten one cycle into contiguous segments covering [0, cycle).
    struct Seg {
        Nanos start;
        GateVector gates;
    };
    std::vector<Seg> segs;
    segs.reserve(gcl.entries.size() * 2 + 1);
    Nanos cursor{0};
    for (const auto& e : gcl.entries) {
        if (e.start > cursor) segs.push_back({cursor, kAllClosed});
        segs.push_back({e.start, e.gates});
        cursor = std::max(cursor, e.end);
    }
    if (cursor < gcl.cycle_time) segs.push_back({cursor, kAllClosed});

    std::size_t idx = 0;
    while (idx + 1 < segs.size() && segs[idx + 1].start <= phase) ++idx;

    const std::size_t n = segs.size();
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t j = (idx + k) % n;
        const Nanos wraps = gcl.cycle_time * static_cast<std::int64_t>((idx + k) / n);
        const Nanos abs_start = cycle_start + wraps + segs[j].start;
        if (visit(abs_start, segs[j].gates)) return abs_start;
    }
    return kNever;
}

}  // namespace

GateVector gate_state_at(const GateControlList& gcl, Nanos t) {
    if (gcl.cycle_time <= Nanos::zero()) return kAllClosed;
    const Nanos phase = positive_mod(t - gcl.base_time, gcl.cycle_time);
    const int i = entry_at(gcl, phase);
    return i < 0 ? kAllClosed : gcl.entries[static_cast<std::size_t>(i)].gates;
}

bool is_gate_open(const GateControlList& gcl, int queue, Nanos t) {
    return gate_open(gate_state_at(gcl, t), queue);
}

Nanos next_gate_close(const GateControlList& gcl, int queue, Nanos t) {
    if (queue < 0 || queue >= kNumQueues) throw std::invalid_argument("queue out of range");
    if (!is_gate_open(gcl, queue, t)) {
        throw std::invalid_argument("next_gate_close: gate of queue " + std::to_string(queue) +
                                    " is closed at t=" + std::to_string(t.count()) + "ns");
    }
    return walk_segments(gcl, t, [&](Nanos, GateVector g) { return !gate_open(g, queue); });
}

Nanos next_gate_change(const GateControlList& gcl, Nanos t) {
    const GateVector now = gate_state_at(gcl, t);
    return walk_segments(gcl, t, [&](Nanos, GateVector g) { return g != now; });
}

GateControlList gcl_from_windows(Nanos cycle, int queue,
                                 const std::vector<std::pair<Nanos, Nanos>>& windows,
                                 GateVector background) {
    const GateVector bit = static_cast<GateVector>(1U << queue);
    const GateVector open = background | bit;
    const GateVector closed = background & static_cast<GateVector>(~bit);

    std::vector<std::pair<Nanos, Nanos>> ws;
    for (const auto& [raw_start, raw_end] : windows) {
        const Nanos len = raw_end - raw_start;
        if (len <= Nanos::zero() || len > cycle) throw std::invalid_argument("bad gate window");
        const Nanos s = positive_mod(raw_start, cycle);
        const Nanos end = s + len;
        if (end > cycle) {
            ws.emplace_back(s, cycle);
            ws.emplace_back(Nanos{0}, end - cycle);
        } else {
            ws.emplace_back(s, end);
        }
    }
    std::sort(ws.begin(), ws.end());

    GateControlList gcl{cycle, {}, Nanos::zero()};
    Nanos cursor{0};
    for (const auto& [s, e] : ws) {
        if (s < cursor) throw std::invalid_argument("overlapping gate windows");
        if (s > cursor) gcl.entries.push_back({cursor, s, closed});
        if (!gcl.entries.empty() && gcl.entries.back().gates == open && gcl.entries.back().end == s) {
            gcl.entries.back().end = e;
        } else {
            gcl.entries.push_back({s, e, open});
        }
        cursor = e;
    }
    if (cursor < cycle) gcl.entries.push_back({cursor, cycle, closed});
    return gcl;
}

}  // namespace tsnsim
