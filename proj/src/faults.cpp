#include "tsnsim/faults.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tsnsim/errors.hpp"

namespace tsnsim {

const char* to_string(FaultKind k) {
    switch (k) {
        case FaultKind::DropFrame:
            return "DropFrame";
        case FaultKind::InjectFrame:
            return "InjectFrame";
        case FaultKind::ShiftFrame:
            return "ShiftFrame";
        case FaultKind::ShiftStream:
            return "ShiftStream";
    }
    return "?";
}

FaultKind fault_kind_from_string(const std::string& s) {
    for (auto k : {FaultKind::DropFrame, FaultKind::InjectFrame, FaultKind::ShiftFrame,
                   FaultKind::ShiftStream}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown fault kind '" + s + "'");
}

std::string synthetic_stream_id(const StreamId& stream) { return "inj:" + stream; }

FaultScenario resolve_targets(const FaultScenario& scenario, std::span<const StreamSpec> streams) {
    FaultScenario out = scenario;
    for (auto& a : out.actions) {
        if (a.seq || !a.near) continue;
        if (a.kind != FaultKind::DropFrame && a.kind != FaultKind::ShiftFrame) continue;
        auto it = std::find_if(streams.begin(), streams.end(),
                               [&](const StreamSpec& s) { return s.stream_id == a.stream_id; });
        if (it == streams.end()) throw ConfigError("fault action references unknown stream '" + a.stream_id + "'");
        if (it->period <= Nanos::zero()) throw ConfigError("stream '" + a.stream_id + "' has no period");
        // Frames of one period leave back to back at the period's offset, so
        // the nearest period start identifies the first frame of that period.
        const auto rel = (*a.near - it->send_offset).count();
        const auto p = it->period.count();
        std::int64_t k = rel <= 0 ? 0 : (rel + p / 2) / p;
        a.seq = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(it->frames_per_period);
    }
    return out;
}

std::vector<Emission> apply(const FaultScenario& scenario, std::vector<Emission> emissions,
                            std::span<const StreamSpec> streams) {
    if (scenario.empty()) return emissions;

    std::set<StreamId> known;
    if (!streams.empty()) {
        for (const auto& s : streams) known.insert(s.stream_id);
    } else {
        for (const auto& e : emissions) known.insert(e.frame.stream_id);
    }

    const FaultScenario resolved = streams.empty() ? scenario : resolve_targets(scenario, streams);

    using Key = std::pair<StreamId, std::uint64_t>;
    std::map<Key, std::size_t> index;
    for (std::size_t i = 0; i < emissions.size(); ++i) {
        const auto& f = emissions[i].frame;
        index.emplace(Key{f.stream_id, f.seq}, i);
    }

    std::vector<bool> dropped(emissions.size(), false);
    std::vector<Nanos> shift(emissions.size(), Nanos::zero());
    std::vector<const FaultAction*> injects;

    for (const auto& a : resolved.actions) {
        if (!known.contains(a.stream_id)) {
            throw ConfigError(std::string(to_string(a.kind)) + " references unknown stream '" + a.stream_id + "'");
        }
        switch (a.kind) {
            case FaultKind::DropFrame:
            case FaultKind::ShiftFrame: {
                if (!a.seq) throw ConfigError(std::string(to_string(a.kind)) + " needs seq or near");
                auto it = index.find(Key{a.stream_id, *a.seq});
                if (it == index.end()) {
                    throw ConfigError(std::string(to_string(a.kind)) + " references unknown frame " +
                                      a.stream_id + "#" + std::to_string(*a.seq));
                }
                if (a.kind == FaultKind::DropFrame) {
                    dropped[it->second] = true;
                } else {
                    shift[it->second] += a.shift;
                }
                break;
            }
            case FaultKind::ShiftStream:
                for (std::size_t i = 0; i < emissions.size(); ++i) {
                    const auto& f = emissions[i].frame;
                    if (f.stream_id == a.stream_id && f.seq >= a.from_seq) shift[i] += a.shift;
                }
                break;
            case FaultKind::InjectFrame:
                injects.push_back(&a);
                break;
        }
    }

    std::vector<Emission> out;
    out.reserve(emissions.size() + injects.size());
    for (std::size_t i = 0; i < emissions.size(); ++i) {
        if (dropped[i]) continue;
        Emission e = std::move(emissions[i]);
        e.time += shift[i];
        e.frame.created_at = e.time;
        out.push_back(std::move(e));
    }

    // Synthetic sequence numbers follow injection time so the result does
    // not depend on the order actions are listed in.
    std::stable_sort(injects.begin(), injects.end(), [](const FaultAction* x, const FaultAction* y) {
        return std::tie(x->stream_id, x->inject.time, x->inject.size, x->inject.priority) <
               std::tie(y->stream_id, y->inject.time, y->inject.size, y->inject.priority);
    });
    std::map<StreamId, std::uint64_t> next_seq;
    for (const FaultAction* a : injects) {
        Frame f;
        f.stream_id = synthetic_stream_id(a->stream_id);
        f.seq = next_seq[a->stream_id]++;
        f.size = a->inject.size;
        f.priority = a->inject.priority;
        f.created_at = a->inject.time;
        f.route = a->stream_id;
        f.synthetic = true;
        out.push_back(Emission{a->inject.time, std::move(f)});
    }

    std::stable_sort(out.begin(), out.end(), [](const Emission& x, const Emission& y) { return x.time < y.time; });
    return out;
}

}  // namespace tsnsim
