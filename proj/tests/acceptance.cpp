// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "oracles/single_link_timeline.hpp"
#include "oracles/trtcm_reference.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/scenarios.hpp"
#include "tsnsim/trace.hpp"

using namespace tsnsim;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

using FrameId = std::pair<std::string, std::uint64_t>;

struct Failure {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw Failure{why};
}

std::string us(Nanos t) { return format_duration(t); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Hop {
    Nanos enqueue{-1};
    Nanos tx_start{-1};
    Nanos tx_end{-1};
};

// Per (stream, seq) egress record on one port.
std::map<FrameId, Hop> hops(const TraceLog& log, const std::string& port) {
    std::map<FrameId, Hop> out;
    const auto id = log.find(port);
    if (!id) return out;
    for (const auto& e : log.frame_events) {
        if (e.location != *id) continue;
        auto& h = out[{log.name(e.stream), e.seq}];
        if (e.kind == FrameEventKind::Enqueue) h.enqueue = e.time;
        if (e.kind == FrameEventKind::TxStart) h.tx_start = e.time;
        if (e.kind == FrameEventKind::TxEnd) h.tx_end = e.time;
    }
    return out;
}

std::map<FrameId, Nanos> tx_starts(const TraceLog& log, const std::string& port) {
    std::map<FrameId, Nanos> out;
    for (const auto& [k, h] : hops(log, port)) {
        if (h.tx_start >= 0ns) out[k] = h.tx_start;
    }
    return out;
}

// Engine transmission starts on the gated port must equal the brute-force
// timeline for every frame.
void match_oracle(const SimConfig& c, const TraceLog& log) {
    const auto oracle = oracle::single_link_timeline(c, {"BR", "L"});
    const auto engine = tx_starts(log, kSingleLinkPort);
    require(engine.size() == oracle.tx_start.size(), c.name + ": engine started " + std::to_string(engine.size()) +
                                                         " frames, oracle " + std::to_string(oracle.tx_start.size()));
    for (const auto& [k, t] : oracle.tx_start) {
        const auto it = engine.find(k);
        require(it != engine.end(), c.name + ": " + k.first + "#" + std::to_string(k.second) + " never started");
        require(it->second.count() == t, c.name + ": " + k.first + "#" + std::to_string(k.second) + " starts at " +
                                             us(it->second) + ", oracle " + us(Nanos(t)));
    }
}

Nanos at(const std::map<FrameId, Nanos>& m, const std::string& s, std::uint64_t seq) {
    const auto it = m.find({s, seq});
    require(it != m.end(), s + "#" + std::to_string(seq) + " has no tx_start");
    return it->second;
}

SimConfig without_faults(SimConfig c) {
    c.scenario = {};
    return c;
}

// ---------------------------------------------------------------------------

std::string criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = build_no_fault();
    const auto r = run(c);
    const double secs = seconds_since(t0);
    require(r.stats.total.dropped() == 0, "drops in baseline");
    std::map<std::string, Bytes> size;
    for (const auto& s : c.streams) size[s.stream_id] = s.frame_size;
    require(size.at("magenta") == 1000 && size.at("blue") == 500, "unexpected frame sizes");
    for (const std::string port : {"T1->BR", "T2->BR", kSingleLinkPort}) {
        for (const auto& [k, h] : hops(r.trace, port)) {
            if (h.tx_end < 0ns) continue;
            const Nanos expect = k.first == "magenta" ? 8us : 4us;
            require(h.tx_end - h.tx_start == expect, port + " " + k.first + " takes " + us(h.tx_end - h.tx_start));
        }
    }
    const auto occ = occupancy_series(r.trace, kSingleLinkPort, 7);
    const Nanos period = c.streams[0].period;
    int boundaries = 0;
    for (Nanos t = period; t < c.sim_end; t += period, ++boundaries) {
        require(occ.value_at(t) == 0.0, "queue holds " + std::to_string(occ.value_at(t)) + " B at " + us(t));
    }
    require(secs < 1.0, "runtime " + std::to_string(secs) + " s");
    std::ostringstream ss;
    ss << "8us/4us transmissions, empty at " << boundaries << " period boundaries, 0 drops, " << secs << " s";
    return ss.str();
}

std::string criterion2() {
    const auto c = build_additional();
    const auto faulty = run(c);
    const auto clean = run(without_faults(c));
    require(faulty.stats.total.dropped() == 0, "drops");
    const auto& inject = c.scenario.actions.at(0);
    const Bytes extra = inject.inject.size;
    const Nanos period = c.streams[0].period;
    const auto occ_f = occupancy_series(faulty.trace, kSingleLinkPort, 7);
    const auto occ_c = occupancy_series(clean.trace, kSingleLinkPort, 7);
    Nanos t = (inject.inject.time / period + 1) * period;
    for (int k = 0; k < 100; ++k, t += period) {
        const double want = occ_c.value_at(t) + static_cast<double>(extra);
        require(occ_f.value_at(t) == want, "boundary " + us(t) + ": " + std::to_string(occ_f.value_at(t)) + " B, want " +
                                               std::to_string(want));
    }

    // Queuing delay on the gated port for every frame enqueued after the
    // injected one.
    const auto hf = hops(faulty.trace, kSingleLinkPort);
    const auto hc = hops(clean.trace, kSingleLinkPort);
    const Nanos injected_at = hf.at({synthetic_stream_id(inject.stream_id), 0}).enqueue;
    int compared = 0;
    for (const auto& [k, h] : hf) {
        if (k.first.starts_with("inj:") || h.enqueue <= injected_at || h.tx_start < 0ns) continue;
        const auto it = hc.find(k);
        if (it == hc.end() || it->second.tx_start < 0ns) continue;
        const Nanos qf = h.tx_start - h.enqueue;
        const Nanos qc = it->second.tx_start - it->second.enqueue;
        require(qf > qc, k.first + "#" + std::to_string(k.second) + " queues " + us(qf) + ", baseline " + us(qc));
        ++compared;
    }
    require(compared > 100, "too few frames compared");
    return "baseline + " + std::to_string(extra) + " B at 100 boundaries; " + std::to_string(compared) +
           " later frames queue longer";
}

std::string criterion3() {
    const auto c = build_late_frame();
    const auto r = run(c);
    match_oracle(c, r.trace);
    const auto tf = tx_starts(r.trace, kSingleLinkPort);
    const auto tc = tx_starts(run(without_faults(c)).trace, kSingleLinkPort);
    // Slot spacing: distance between consecutive opening instants of the gate.
    const auto& gcl = c.gcls.at(0).gcl;
    std::vector<Nanos> opens;
    for (const auto& e : gcl.entries) {
        if (gate_open(e.gates, 7)) opens.push_back(e.start);
    }
    require(opens.size() == 2, "expected two slots per cycle");
    const Nanos spacing = opens[1] - opens[0];
    const auto& a = c.scenario.actions.at(0);
    const std::uint64_t late = *a.seq;
    // The late frame misses its own slot and takes the next one.
    require(at(tf, a.stream_id, late) == at(tc, a.stream_id, late) + spacing, "late frame not in the following slot");
    int checked = 0;
    for (const auto& [k, t] : tf) {
        if (k.first == a.stream_id ? k.second < late : at(tc, k.first, k.second) < at(tc, a.stream_id, late)) {
            require(t == at(tc, k.first, k.second), k.first + "#" + std::to_string(k.second) + " moved before the fault");
            continue;
        }
        require(t == at(tc, k.first, k.second) + spacing,
                k.first + "#" + std::to_string(k.second) + " starts " + us(t) + ", baseline " + us(at(tc, k.first, k.second)));
        ++checked;
    }
    return std::to_string(checked) + " later frames delayed by exactly " + us(spacing) + "; oracle agrees";
}

std::string criterion4() {
    std::ostringstream detail;
    {
        const auto c = build_delayed_stream();
        const auto r = run(c);
        match_oracle(c, r.trace);
        // magenta now starts in blue's slot and blue in magenta's.
        const Nanos cycle = c.gcls.at(0).gcl.cycle_time;
        const auto in_slot = [&](Nanos t, Nanos from, Nanos to) { return t % cycle >= from && t % cycle < to; };
        for (const auto& [k, t] : tx_starts(r.trace, kSingleLinkPort)) {
            if (k.first == "magenta") require(in_slot(t, 30us, 40us), "magenta#" + std::to_string(k.second) + " at " + us(t));
            if (k.first == "blue" && k.second > 0) require(in_slot(t, 10us, 20us), "blue#" + std::to_string(k.second) + " at " + us(t));
        }
        detail << "delayed stream swaps slots";
    }
    {
        const auto c = build_early();
        const auto r = run(c);
        match_oracle(c, r.trace);
        const auto t = tx_starts(r.trace, kSingleLinkPort);
        const auto base = tx_starts(run(without_faults(c)).trace, kSingleLinkPort);
        require(at(base, "magenta", 1) < at(base, "blue", 1), "baseline order");
        require(at(t, "blue", 1) < at(t, "magenta", 1), "early blue frame not first");
        require(at(t, "blue", 1) == 42us && at(t, "magenta", 1) == 46us, "early timeline");
        detail << "; early blue first at " << us(at(t, "blue", 1));
    }
    {
        const auto c = build_missing();
        const auto r = run(c);
        match_oracle(c, r.trace);
        const auto t = tx_starts(r.trace, kSingleLinkPort);
        const auto base = tx_starts(run(without_faults(c)).trace, kSingleLinkPort);
        const auto& gcl = c.gcls.at(0).gcl;
        const Nanos opening = next_gate_change(gcl, 30us);  // gate opens in period 1
        require(at(t, "blue", 1) == opening, "blue#1 at " + us(at(t, "blue", 1)) + ", gate opens " + us(opening));
        require(at(t, "blue", 1) < at(base, "blue", 1), "not earlier than baseline");
        detail << "; missing frame lets blue start at opening " << us(opening) << " (baseline "
               << us(at(base, "blue", 1)) << ")";
    }
    detail << "; brute-force timeline matches all frames";
    return detail.str();
}

std::string criterion5() {
    const auto c = build_continuous_increase();
    const auto r = run(c);
    const Nanos H = hyperperiod(c.streams);
    const auto occ = occupancy_series(r.trace, kSingleLinkPort, 7);
    const auto oracle = oracle::single_link_timeline(c, {"BR", "L"}, H.count());
    int run_len = 1;
    int best = 1;
    double prev = -1;
    for (std::size_t k = 0; k < oracle.window_peaks.size(); ++k) {
        const Nanos from = H * static_cast<int>(k);
        const double p = occ.peak(from, from + H);
        require(std::abs(p - oracle.window_peaks[k]) < 1e-6,
                "hyperperiod " + std::to_string(k) + ": peak " + std::to_string(p) + ", oracle " +
                    std::to_string(oracle.window_peaks[k]));
        run_len = p > prev ? run_len + 1 : 1;
        best = std::max(best, run_len);
        prev = p;
    }
    require(best >= 50, "longest strictly increasing run " + std::to_string(best));
    const auto bounded = run(build_continuous_increase(8000));
    require(bounded.stats.total.dropped_overflow > 0, "no overflow with finite capacity");
    return "peaks rise for " + std::to_string(best) + " consecutive hyperperiods; " +
           std::to_string(bounded.stats.total.dropped_overflow) + " overflow drops at 8000 B capacity";
}

std::string criterion6() {
    const auto base_run = run(bundled_scenario("network_baseline").config);
    const auto t0 = std::chrono::steady_clock::now();
    const auto sc = bundled_scenario("network_late_frame");
    const auto fault_run = run(sc.config);
    const double secs = seconds_since(t0);
    require(sc.config.sim_end == 600ms, "fault run is not 600 ms");
    const Nanos fault = *sc.config.scenario.actions.at(0).near;
    const Nanos horizon = fault + 500ms;
    const Nanos window = 50ms;
    std::ostringstream ss;
    for (const auto& s : sc.config.streams) {
        Nanos baseline{0};
        for (const auto& l : latency_series(base_run.trace, s.stream_id)) {
            require(!l.dropped, "baseline drop");
            baseline = std::max(baseline, l.latency);
        }
        require(baseline < 100us, s.stream_id + " baseline " + us(baseline));

        std::optional<Nanos> first;
        std::vector<double> means;
        long double sum = 0;
        std::uint64_t n = 0;
        Nanos w_end = fault + window;
        for (const auto& l : latency_series(fault_run.trace, s.stream_id)) {
            require(!l.dropped, "drop in fault run");
            if (l.emitted < fault) continue;
            if (!first && l.latency > 10 * baseline) first = *l.delivered;
            if (l.emitted >= horizon) break;
            while (l.emitted >= w_end) {
                means.push_back(n ? static_cast<double>(sum / n) : 0.0);
                sum = 0;
                n = 0;
                w_end += window;
            }
            sum += l.latency.count();
            ++n;
        }
        if (n) means.push_back(static_cast<double>(sum / n));
        require(first && *first <= horizon, s.stream_id + " never exceeds 10x " + us(baseline) + " by " + us(horizon));
        for (std::size_t i = 1; i < means.size(); ++i) {
            require(means[i] >= means[i - 1], s.stream_id + ": mean latency falls in window " + std::to_string(i));
        }
        ss << s.stream_id << " " << us(baseline) << "->10x at " << us(*first - fault) << ", ";
    }
    require(secs < 30.0, "runtime " + std::to_string(secs) + " s");
    ss << "600 ms in " << secs << " s";
    return ss.str();
}

std::string criterion7() {
    const auto sc = bundled_scenario("network_late_frame_psfp");
    const auto faulty = run(sc.config);
    const auto clean = run(bundled_scenario("network_baseline").config);
    const auto target = resolve_targets(sc.config.scenario, sc.config.streams).actions.at(0);
    const FrameId dropped{target.stream_id, *target.seq};

    require(faulty.stats.total.dropped() == 1, std::to_string(faulty.stats.total.dropped()) + " drops");
    for (const auto& e : faulty.trace.frame_events) {
        if (e.kind == FrameEventKind::Drop) {
            require(FrameId{faulty.trace.name(e.stream), e.seq} == dropped, "wrong frame dropped");
        }
    }

    // Same latency for every other frame, over the whole run.
    for (const auto& s : sc.config.streams) {
        const auto a = latency_series(faulty.trace, s.stream_id);
        const auto b = latency_series(clean.trace, s.stream_id);
        require(a.size() == b.size(), s.stream_id + " sample count");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (FrameId{s.stream_id, a[i].seq} == dropped) continue;
            require(a[i].latency == b[i].latency, s.stream_id + "#" + std::to_string(a[i].seq) + " latency differs");
        }
    }

    // Frame-event trace equality from one hyperperiod after the fault.
    const Nanos from = *target.near + target.shift + hyperperiod(sc.config.streams);
    using Row = std::tuple<Nanos, std::string, std::string, std::uint64_t, FrameEventKind, int, Bytes, std::string>;
    const auto rows = [&](const TraceLog& log) {
        std::vector<Row> out;
        for (const auto& e : log.frame_events) {
            if (e.time < from || FrameId{log.name(e.stream), e.seq} == dropped) continue;
            out.emplace_back(e.time, log.name(e.location), log.name(e.stream), e.seq, e.kind, e.queue, e.size,
                             log.name(e.detail));
        }
        return out;
    };
    const auto rf = rows(faulty.trace);
    const auto rc = rows(clean.trace);
    require(rf == rc, "traces differ after " + us(from));
    return "dropped only " + dropped.first + "#" + std::to_string(dropped.second) + "; " + std::to_string(rf.size()) +
           " frame events from " + us(from) + " equal the fault-free run";
}

std::string criterion8() {
    const auto root = fs::temp_directory_path() / "tsnsim_acceptance";
    fs::remove_all(root);
    int files = 0;
    for (const auto& name : scenario_names()) {
        const auto c = bundled_scenario(name).config;
        const auto a = run(c);
        const auto b = run(c);
        export_csv(a.trace, root / name / "a");
        export_csv(b.trace, root / name / "b");
        for (const char* f : {"frames.csv", "latency.csv", "gates.csv", "meters.csv"}) {
            require(read_text_file(root / name / "a" / f) == read_text_file(root / name / "b" / f), name + "/" + f);
            ++files;
        }
        for (const auto& [id, s] : a.stats.per_stream) {
            require(s.conserved(), name + " " + id + " not conserved");
        }
        require(a.stats.total.conserved(), name + " totals not conserved");
    }
    fs::remove_all(root);
    return std::to_string(scenario_names().size()) + " scenarios, " + std::to_string(files) +
           " CSV pairs identical, conservation holds";
}

std::string criterion9() {
    std::mt19937_64 rng(20241019);
    std::uint64_t frames = 0;
    for (int seq = 0; seq < 1000; ++seq) {
        FlowMeterParams p{"m", static_cast<BitRate>(1 + rng() % 10'000'000'000ULL), static_cast<Bytes>(rng() % 4000),
                          static_cast<BitRate>(rng() % 10'000'000'000ULL), static_cast<Bytes>(rng() % 4000), false};
        FlowMeter m(p);
        oracle::Trtcm ref(p);
        Nanos t{0};
        const int n = 1 + static_cast<int>(rng() % 200);
        for (int i = 0; i < n; ++i) {
            t += Nanos(static_cast<std::int64_t>(rng() % (rng() % 4 == 0 ? 5'000'000 : 20'000)));
            const Bytes size = 64 + static_cast<Bytes>(rng() % 1459);
            const Color got = meter_frame(m, size, t);
            const Color want = ref.offer(size, t.count());
            require(got == want, "sequence " + std::to_string(seq) + " frame " + std::to_string(i) + ": " +
                                     to_string(got) + " vs " + to_string(want));
            ++frames;
        }
    }
    return "1000 sequences, " + std::to_string(frames) + " frames, colors identical";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
        {"1 baseline single link", criterion1},      {"2 additional frame", criterion2},
        {"3 late frame", criterion3},                {"4 slot reassignment", criterion4},
        {"5 continuous increase", criterion5},       {"6 network propagation", criterion6},
        {"7 PSFP mitigation", criterion7},           {"8 determinism and conservation", criterion8},
        {"9 meter oracle", criterion9},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        try {
            const auto detail = check();
            std::cout << "PASS criterion " << name << ": " << detail << std::endl;
        } catch (const Failure& f) {
            ++failed;
            std::cout << "FAIL criterion " << name << ": " << f.why << std::endl;
        } catch (const std::exception& e) {
            ++failed;
            std::cout << "FAIL criterion " << name << ": exception: " << e.what() << std::endl;
        }
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
