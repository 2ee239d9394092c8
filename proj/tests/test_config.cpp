#include <gtest/gtest.h>

#include "tsnsim/config.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/scenarios.hpp"

using namespace tsnsim;
using namespace std::chrono_literals;

namespace {

const char* kMinimal = R"({
  // comments are allowed
  "name": "mini",
  "topology": {
    "nodes": [{"id": "T", "kind": "end_station"}, {"id": "S", "kind": "bridge"}, {"id": "L", "kind": "end_station"}],
    "links": [{"node_a": "T", "node_b": "S", "rate": "1Gbps"},
              {"node_a": "S", "node_b": "L", "rate": 1000000000, "propagation_delay": "50ns"}]
  },
  "streams": [{"stream_id": "s", "talker": "T", "listener": "L", "path": ["S"],
               "period": "60us", "send_offset": "5 us", "frame_size": 1000}],
  "gcls": [{"bridge": "S", "port": "L", "cycle_time": "60us",
            "entries": [{"start": 0, "end": "30us", "gates": "0x80"},
                        {"start": "30us", "end": "60us", "gates": "0b00000000"}]}],
  "sim": {"sim_end": "1ms"}
})";

}  // namespace

TEST(Config, ParsesMinimalDocument) {
    const auto c = parse_config(kMinimal);
    EXPECT_EQ(c.name, "mini");
    ASSERT_EQ(c.topology.nodes.size(), 3U);
    EXPECT_EQ(c.topology.nodes[1].kind, NodeKind::Bridge);
    EXPECT_EQ(c.topology.links[1].propagation_delay, 50ns);
    ASSERT_EQ(c.streams.size(), 1U);
    EXPECT_EQ(c.streams[0].send_offset, 5us);
    EXPECT_EQ(c.streams[0].priority, 7);
    ASSERT_EQ(c.gcls.size(), 1U);
    EXPECT_EQ(c.gcls[0].port, (PortKey{"S", "L"}));
    EXPECT_EQ(c.gcls[0].gcl.entries[0].gates, 0x80);
    EXPECT_EQ(c.sim_end, 1ms);
    // Forwarding is prefilled from the stream path.
    ASSERT_EQ(c.topology.forwarding.size(), 1U);
    EXPECT_EQ(c.topology.forwarding[0], (ForwardingEntry{"S", "s", "L"}));
}

TEST(Config, DumpParseRoundTrip) {
    for (const auto& name : scenario_names()) {
        const auto c = bundled_scenario(name).config;
        const auto text = dump_config(c);
        const auto back = parse_config(text);
        EXPECT_EQ(back, c) << name;
        EXPECT_EQ(dump_config(back), text) << name;
    }
}

TEST(Config, RoundTripWithPsfpAndFaults) {
    auto c = parse_config(kMinimal);
    PsfpAttachment att;
    att.bridge = "S";
    att.ingress = "T";
    att.config.fail_closed = true;
    att.config.filters.push_back({0, std::string("s"), 7, 1500, "g", std::string("m")});
    att.config.filters.push_back({1, std::nullopt, std::nullopt, std::nullopt, "g", std::nullopt});
    att.config.gates["g"] = StreamGate{"g", 60us, 1us, {{0us, 10us, true, 3}, {10us, 60us, false, std::nullopt}}};
    att.config.meters["m"] = FlowMeterParams{"m", 8'000'000, 1000, 4'000'000, 500, true};
    c.psfp.push_back(att);
    FaultAction a;
    a.kind = FaultKind::InjectFrame;
    a.stream_id = "s";
    a.inject = {42us, 300, 5};
    c.scenario.actions.push_back(a);
    FaultAction b;
    b.kind = FaultKind::ShiftFrame;
    b.stream_id = "s";
    b.near = 10ms;
    b.shift = -3us;
    c.scenario.actions.push_back(b);
    EXPECT_EQ(parse_config(dump_config(c)), c);
}

TEST(Config, MalformedDocument) {
    try {
        parse_config("{ \"topology\": ");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("malformed"), std::string::npos);
    }
}

TEST(Config, DiagnosticNamesTheField) {
    std::string text = kMinimal;
    text.replace(text.find("\"frame_size\": 1000"), 18, "\"frame_size\": \"big\"");
    try {
        parse_config(text);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("$.streams[0].frame_size"), std::string::npos) << e.what();
    }
}

TEST(Config, BadUnitsAndKinds) {
    std::string text = kMinimal;
    text.replace(text.find("\"60us\""), 6, "\"60 parsecs\"");
    EXPECT_THROW(parse_config(text), ConfigError);
    std::string kind = kMinimal;
    kind.replace(kind.find("\"bridge\""), 8, "\"router\"");
    EXPECT_THROW(parse_config(kind), ConfigError);
    EXPECT_THROW(parse_config("{\"topology\": {\"nodes\": [], \"links\": []}}"), ConfigError);  // no sim
}

TEST(Config, MissingFileIsIoError) { EXPECT_THROW(load_config("/nonexistent/config.json"), IoError); }
