#include "tsnsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "tsnsim/errors.hpp"

namespace tsnsim {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

const GateControlList* SimConfig::gcl_for(const PortKey& port) const {
    for (const auto& g : gcls) {
        if (g.port == port) return &g.gcl;
    }
    return nullptr;
}

const StreamSpec* SimConfig::find_stream(const StreamId& id) const {
    for (const auto& s : streams) {
        if (s.stream_id == id) return &s;
    }
    return nullptr;
}

void prefill_forwarding(SimConfig& config) {
    auto& fwd = config.topology.forwarding;
    for (const auto& s : config.streams) {
        const auto hops = s.hops();
        for (std::size_t i = 1; i + 1 < hops.size(); ++i) {
            const bool present = std::any_of(fwd.begin(), fwd.end(), [&](const ForwardingEntry& e) {
                return e.bridge == hops[i] && e.stream_id == s.stream_id;
            });
            if (!present) fwd.push_back({hops[i], s.stream_id, hops[i + 1]});
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

namespace {

// Context-carrying accessors so diagnostics name the offending field.
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

    Reader at(const char* key) const {
        if (!has(key)) fail(std::string("missing field '") + key + "'");
        return Reader(j_.at(key), path_ + "." + key);
    }

    std::vector<Reader> items() const {
        if (!j_.is_array()) fail("expected an array");
        std::vector<Reader> out;
        for (std::size_t i = 0; i < j_.size(); ++i) {
            out.emplace_back(j_.at(i), path_ + "[" + std::to_string(i) + "]");
        }
        return out;
    }

    std::vector<std::pair<std::string, Reader>> members() const {
        if (!j_.is_object()) fail("expected an object");
        std::vector<std::pair<std::string, Reader>> out;
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            out.emplace_back(it.key(), Reader(it.value(), path_ + "." + it.key()));
        }
        return out;
    }

    std::string str() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    std::int64_t integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<std::int64_t>();
    }

    bool boolean() const {
        if (!j_.is_boolean()) fail("expected true/false");
        return j_.get<bool>();
    }

    Nanos duration() const {
        if (j_.is_number_integer()) return Nanos{j_.get<std::int64_t>()};
        try {
            return parse_duration(str());
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    BitRate rate() const {
        if (j_.is_number_integer()) return j_.get<std::int64_t>();
        try {
            return parse_rate(str());
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    GateVector gates() const {
        std::int64_t v = 0;
        if (j_.is_number_integer()) {
            v = j_.get<std::int64_t>();
        } else {
            const std::string s = str();
            try {
                if (s.rfind("0b", 0) == 0) {
                    v = std::stoll(s.substr(2), nullptr, 2);
                } else if (s.rfind("0x", 0) == 0) {
                    v = std::stoll(s.substr(2), nullptr, 16);
                } else {
                    v = std::stoll(s, nullptr, 10);
                }
            } catch (const std::exception&) {
                fail("malformed gate vector '" + s + "'");
            }
        }
        if (v < 0 || v > 0xFF) fail("gate vector out of 8-bit range");
        return static_cast<GateVector>(v);
    }

    // "*" or absent means wildcard.
    std::optional<std::string> opt_str(const char* key) const {
        if (!has(key)) return std::nullopt;
        auto s = at(key).str();
        if (s == "*") return std::nullopt;
        return s;
    }

    std::optional<std::int64_t> opt_int(const char* key) const {
        if (!has(key)) return std::nullopt;
        const auto& v = j_.at(key);
        if (v.is_string() && v.get<std::string>() == "*") return std::nullopt;
        return at(key).integer();
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

private:
    const Json& j_;
    std::string path_;
};

NodeKind node_kind(const Reader& r) {
    const auto s = r.str();
    if (s == "end_station") return NodeKind::EndStation;
    if (s == "bridge") return NodeKind::Bridge;
    r.fail("unknown node kind '" + s + "' (end_station|bridge)");
}

GateControlList read_gcl(const Reader& r) {
    GateControlList g;
    g.cycle_time = r.at("cycle_time").duration();
    if (r.has("base_time")) g.base_time = r.at("base_time").duration();
    for (const auto& e : r.at("entries").items()) {
        g.entries.push_back({e.at("start").duration(), e.at("end").duration(), e.at("gates").gates()});
    }
    return g;
}

PsfpConfig read_psfp(const Reader& r) {
    PsfpConfig p;
    if (r.has("fail_closed")) p.fail_closed = r.at("fail_closed").boolean();
    if (r.has("filters")) {
        for (const auto& f : r.at("filters").items()) {
            StreamFilter sf;
            sf.order = static_cast<int>(f.at("order").integer());
            sf.match_stream = f.opt_str("match_stream");
            if (auto v = f.opt_int("match_priority")) sf.match_priority = static_cast<int>(*v);
            sf.max_sdu = f.opt_int("max_sdu");
            sf.gate_ref = f.at("gate_ref").str();
            if (f.has("meter_ref")) sf.meter_ref = f.at("meter_ref").str();
            p.filters.push_back(std::move(sf));
        }
    }
    if (r.has("gates")) {
        for (const auto& [id, g] : r.at("gates").members()) {
            StreamGate sg;
            sg.gate_id = id;
            sg.cycle_time = g.at("cycle_time").duration();
            if (g.has("base_time")) sg.base_time = g.at("base_time").duration();
            for (const auto& e : g.at("entries").items()) {
                StreamGateEntry se;
                se.start = e.at("start").duration();
                se.end = e.at("end").duration();
                se.open = e.at("open").boolean();
                if (e.has("ipv")) se.ipv = static_cast<int>(e.at("ipv").integer());
                sg.entries.push_back(se);
            }
            p.gates.emplace(id, std::move(sg));
        }
    }
    if (r.has("meters")) {
        for (const auto& [id, m] : r.at("meters").members()) {
            FlowMeterParams fm;
            fm.meter_id = id;
            fm.cir = m.at("cir").rate();
            fm.cbs = m.at("cbs").integer();
            fm.eir = m.has("eir") ? m.at("eir").rate() : 0;
            fm.ebs = m.has("ebs") ? m.at("ebs").integer() : 0;
            if (m.has("drop_yellow")) fm.drop_yellow = m.at("drop_yellow").boolean();
            p.meters.emplace(id, std::move(fm));
        }
    }
    return p;
}

FaultAction read_action(const Reader& r) {
    FaultAction a;
    a.kind = fault_kind_from_string(r.at("kind").str());
    a.stream_id = r.at("stream_id").str();
    if (r.has("seq")) a.seq = static_cast<std::uint64_t>(r.at("seq").integer());
    if (r.has("near")) a.near = r.at("near").duration();
    if (r.has("shift")) a.shift = r.at("shift").duration();
    if (r.has("from_seq")) a.from_seq = static_cast<std::uint64_t>(r.at("from_seq").integer());
    if (a.kind == FaultKind::InjectFrame) {
        const auto inj = r.at("inject");
        a.inject.time = inj.at("time").duration();
        a.inject.size = inj.at("size").integer();
        if (inj.has("priority")) a.inject.priority = static_cast<int>(inj.at("priority").integer());
    }
    return a;
}

SimConfig read_config(const Reader& root) {
    SimConfig c;
    if (root.has("name")) c.name = root.at("name").str();
    if (root.has("notes")) {
        for (const auto& n : root.at("notes").items()) c.notes.push_back(n.str());
    }

    const auto topo = root.at("topology");
    for (const auto& n : topo.at("nodes").items()) {
        c.topology.nodes.push_back({n.at("id").str(), node_kind(n.at("kind"))});
    }
    for (const auto& l : topo.at("links").items()) {
        Link link;
        link.a = l.at("node_a").str();
        link.b = l.at("node_b").str();
        if (l.has("rate")) link.rate_bps = l.at("rate").rate();
        if (l.has("propagation_delay")) link.propagation_delay = l.at("propagation_delay").duration();
        c.topology.links.push_back(std::move(link));
    }
    if (topo.has("forwarding")) {
        for (const auto& f : topo.at("forwarding").items()) {
            c.topology.forwarding.push_back({f.at("bridge").str(), f.at("stream_id").str(), f.at("next_hop").str()});
        }
    }

    if (root.has("streams")) {
        for (const auto& s : root.at("streams").items()) {
            StreamSpec ss;
            ss.stream_id = s.at("stream_id").str();
            ss.talker = s.at("talker").str();
            ss.listener = s.at("listener").str();
            if (s.has("path")) {
                for (const auto& p : s.at("path").items()) ss.path.push_back(p.str());
            }
            ss.period = s.at("period").duration();
            if (s.has("send_offset")) ss.send_offset = s.at("send_offset").duration();
            ss.frame_size = s.at("frame_size").integer();
            if (s.has("priority")) ss.priority = static_cast<int>(s.at("priority").integer());
            if (s.has("frames_per_period")) ss.frames_per_period = static_cast<int>(s.at("frames_per_period").integer());
            c.streams.push_back(std::move(ss));
        }
    }

    if (root.has("gcls")) {
        for (const auto& g : root.at("gcls").items()) {
            c.gcls.push_back({PortKey{g.at("bridge").str(), g.at("port").str()}, read_gcl(g)});
        }
    }

    if (root.has("psfp")) {
        for (const auto& p : root.at("psfp").items()) {
            PsfpAttachment att;
            att.bridge = p.at("bridge").str();
            if (p.has("ingress")) att.ingress = p.at("ingress").str();
            att.config = read_psfp(p);
            c.psfp.push_back(std::move(att));
        }
    }

    if (root.has("scenario")) {
        const auto sc = root.at("scenario");
        if (sc.has("actions")) {
            for (const auto& a : sc.at("actions").items()) c.scenario.actions.push_back(read_action(a));
        }
    }

    const auto sim = root.at("sim");
    c.sim_end = sim.at("sim_end").duration();
    if (sim.has("queue_capacity")) c.queue_capacity = sim.at("queue_capacity").integer();
    if (sim.has("processing_delay")) c.processing_delay = sim.at("processing_delay").duration();
    if (sim.has("include_l1_overhead")) c.include_l1_overhead = sim.at("include_l1_overhead").boolean();
    if (sim.has("min_frame_size")) c.min_frame_size = sim.at("min_frame_size").integer();
    if (sim.has("max_frame_size")) c.max_frame_size = sim.at("max_frame_size").integer();

    if (!topo.has("forwarding")) prefill_forwarding(c);
    return c;
}

std::string gates_hex(GateVector g) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    s += digits[g >> 4];
    s += digits[g & 0xF];
    return s;
}

}  // namespace

Nanos schedule_hyperperiod(const SimConfig& config) {
    std::int64_t h = 0;
    const auto fold = [&h](Nanos v) {
        if (v > Nanos::zero()) h = h == 0 ? v.count() : std::lcm(h, v.count());
    };
    for (const auto& s : config.streams) fold(s.period);
    for (const auto& g : config.gcls) fold(g.gcl.cycle_time);
    for (const auto& a : config.psfp) {
        for (const auto& [id, g] : a.config.gates) fold(g.cycle_time);
    }
    return Nanos(h);
}

SimConfig parse_config(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("malformed config document: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config document must be an object");
    try {
        return read_config(Reader(doc, "$"));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// dumping

std::string dump_config(const SimConfig& c) {
    OJson root;
    root["name"] = c.name;
    root["notes"] = c.notes;

    OJson topo;
    topo["nodes"] = OJson::array();
    for (const auto& n : c.topology.nodes) {
        topo["nodes"].push_back({{"id", n.id}, {"kind", n.kind == NodeKind::Bridge ? "bridge" : "end_station"}});
    }
    topo["links"] = OJson::array();
    for (const auto& l : c.topology.links) {
        topo["links"].push_back({{"node_a", l.a},
                                 {"node_b", l.b},
                                 {"rate", l.rate_bps},
                                 {"propagation_delay", format_duration(l.propagation_delay)}});
    }
    topo["forwarding"] = OJson::array();
    for (const auto& f : c.topology.forwarding) {
        topo["forwarding"].push_back({{"bridge", f.bridge}, {"stream_id", f.stream_id}, {"next_hop", f.next_hop}});
    }
    root["topology"] = std::move(topo);

    root["streams"] = OJson::array();
    for (const auto& s : c.streams) {
        root["streams"].push_back({{"stream_id", s.stream_id},
                                   {"talker", s.talker},
                                   {"listener", s.listener},
                                   {"path", s.path},
                                   {"period", format_duration(s.period)},
                                   {"send_offset", format_duration(s.send_offset)},
                                   {"frame_size", s.frame_size},
                                   {"priority", s.priority},
                                   {"frames_per_period", s.frames_per_period}});
    }

    root["gcls"] = OJson::array();
    for (const auto& g : c.gcls) {
        OJson entries = OJson::array();
        for (const auto& e : g.gcl.entries) {
            entries.push_back({{"start", format_duration(e.start)},
                               {"end", format_duration(e.end)},
                               {"gates", gates_hex(e.gates)}});
        }
        root["gcls"].push_back({{"bridge", g.port.node},
                                {"port", g.port.neighbor},
                                {"cycle_time", format_duration(g.gcl.cycle_time)},
                                {"base_time", format_duration(g.gcl.base_time)},
                                {"entries", std::move(entries)}});
    }

    root["psfp"] = OJson::array();
    for (const auto& att : c.psfp) {
        OJson p;
        p["bridge"] = att.bridge;
        p["ingress"] = att.ingress;
        p["fail_closed"] = att.config.fail_closed;
        p["filters"] = OJson::array();
        for (const auto& f : att.config.filters) {
            OJson jf;
            jf["order"] = f.order;
            jf["match_stream"] = f.match_stream ? OJson(*f.match_stream) : OJson("*");
            jf["match_priority"] = f.match_priority ? OJson(*f.match_priority) : OJson("*");
            if (f.max_sdu) jf["max_sdu"] = *f.max_sdu;
            jf["gate_ref"] = f.gate_ref;
            if (f.meter_ref) jf["meter_ref"] = *f.meter_ref;
            p["filters"].push_back(std::move(jf));
        }
        p["gates"] = OJson::object();
        for (const auto& [id, g] : att.config.gates) {
            OJson entries = OJson::array();
            for (const auto& e : g.entries) {
                OJson je{{"start", format_duration(e.start)}, {"end", format_duration(e.end)}, {"open", e.open}};
                if (e.ipv) je["ipv"] = *e.ipv;
                entries.push_back(std::move(je));
            }
            p["gates"][id] = {{"cycle_time", format_duration(g.cycle_time)},
                              {"base_time", format_duration(g.base_time)},
                              {"entries", std::move(entries)}};
        }
        p["meters"] = OJson::object();
        for (const auto& [id, m] : att.config.meters) {
            p["meters"][id] = {{"cir", m.cir}, {"cbs", m.cbs}, {"eir", m.eir}, {"ebs", m.ebs}, {"drop_yellow", m.drop_yellow}};
        }
        root["psfp"].push_back(std::move(p));
    }

    OJson actions = OJson::array();
    for (const auto& a : c.scenario.actions) {
        OJson ja;
        ja["kind"] = to_string(a.kind);
        ja["stream_id"] = a.stream_id;
        switch (a.kind) {
            case FaultKind::DropFrame:
            case FaultKind::ShiftFrame:
                if (a.seq) ja["seq"] = *a.seq;
                if (a.near) ja["near"] = format_duration(*a.near);
                if (a.kind == FaultKind::ShiftFrame) ja["shift"] = format_duration(a.shift);
                break;
            case FaultKind::ShiftStream:
                ja["from_seq"] = a.from_seq;
                ja["shift"] = format_duration(a.shift);
                break;
            case FaultKind::InjectFrame:
                ja["inject"] = {{"time", format_duration(a.inject.time)},
                                {"size", a.inject.size},
                                {"priority", a.inject.priority}};
                break;
        }
        actions.push_back(std::move(ja));
    }
    root["scenario"] = {{"actions", std::move(actions)}};

    root["sim"] = {{"sim_end", format_duration(c.sim_end)},
                   {"queue_capacity", c.queue_capacity},
                   {"processing_delay", format_duration(c.processing_delay)},
                   {"include_l1_overhead", c.include_l1_overhead},
                   {"min_frame_size", c.min_frame_size},
                   {"max_frame_size", c.max_frame_size}};
    return root.dump(2) + "\n";
}

}  // namespace tsnsim
