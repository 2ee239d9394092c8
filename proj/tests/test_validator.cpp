#include <gtest/gtest.h>

#include <random>

#include "support/random_config.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/scenarios.hpp"
#include "tsnsim/validator.hpp"

using namespace tsnsim;
using namespace std::chrono_literals;

namespace {

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
    return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code; });
}

// magenta alone through a gate whose only window is too short for it.
SimConfig undersized_slot() {
    auto c = build_no_fault();
    c.streams.pop_back();
    c.topology.forwarding.clear();
    prefill_forwarding(c);
    c.gcls[0].gcl = gcl_from_windows(30us, 7, {{12us, 16us}});
    return c;
}

}  // namespace

TEST(Validate, BundledScenariosAreValid) {
    for (const auto& name : scenario_names()) {
        const auto ds = validate_config(bundled_scenario(name).config);
        EXPECT_TRUE(ds.empty()) << name << "\n" << format_diagnostics(ds);
    }
}

TEST(Validate, GclGap) {
    auto c = build_no_fault();
    c.gcls[0].gcl.entries = {{0us, 30us - 10us, 0x80}};
    c.gcls[0].gcl.cycle_time = 30us;
    const auto ds = validate_config(c);
    EXPECT_TRUE(has_code(ds, "GCL gap")) << format_diagnostics(ds);
}

TEST(Validate, GclOverlapAndOrder) {
    auto c = build_no_fault();
    c.gcls[0].gcl.entries = {{0us, 20us, 0x80}, {10us, 30us, 0x00}};
    EXPECT_TRUE(has_code(validate_config(c), "GCL overlap"));
}

TEST(Validate, PathThroughMissingLink) {
    auto c = build_seven_stream_network();
    c.streams[0].path = {"B1", "B3"};
    c.topology.forwarding.clear();
    prefill_forwarding(c);
    const auto ds = validate_config(c);
    EXPECT_TRUE(has_code(ds, "path link")) << format_diagnostics(ds);
}

TEST(Validate, ReportsEveryViolation) {
    auto c = build_no_fault();
    c.streams[0].send_offset = c.streams[0].period;
    c.streams[1].frame_size = 10;
    c.streams[1].priority = 9;
    const auto ds = validate_config(c);
    EXPECT_TRUE(has_code(ds, "stream offset"));
    EXPECT_TRUE(has_code(ds, "frame size"));
    EXPECT_TRUE(has_code(ds, "priority"));
    const auto text = format_diagnostics(ds);
    EXPECT_NE(text.find("stream offset: "), std::string::npos);
}

TEST(Validate, IncommensurableCycle) {
    auto c = build_no_fault();  // 30 us periods
    c.gcls[0].gcl = gcl_from_windows(45us, 7, {{12us, 26us}});
    EXPECT_TRUE(has_code(validate_config(c), "GCL cycle"));
}

TEST(Validate, FaultReferences) {
    auto c = build_no_fault();
    FaultAction a;
    a.kind = FaultKind::DropFrame;
    a.stream_id = "orange";
    a.seq = 0;
    c.scenario.actions.push_back(a);
    EXPECT_TRUE(has_code(validate_config(c), "fault ref"));
}

TEST(Validate, InjectedPrefixReserved) {
    auto c = build_no_fault();
    c.streams[1].stream_id = "inj:blue";
    c.topology.forwarding.clear();
    prefill_forwarding(c);
    EXPECT_FALSE(validate_config(c).empty());
}

TEST(Feasibility, NoFaultDrainsEachPeriod) {
    const auto rep = check_feasibility(build_no_fault());
    EXPECT_TRUE(rep.feasible) << feasibility_text(rep);
    EXPECT_EQ(rep.hyperperiod, 30us);
    EXPECT_EQ(rep.slot_misses, 0U);
    for (const auto& b : rep.backlog) {
        for (Bytes v : b.at_boundary) EXPECT_EQ(v, 0) << b.port << ":" << b.queue;
    }
    EXPECT_EQ(rep.max_latency.at("magenta"), 20us);
}

TEST(Feasibility, UndersizedSlotMisses) {
    const auto rep = check_feasibility(undersized_slot());
    EXPECT_FALSE(rep.feasible);
    EXPECT_GT(rep.slot_misses, 0U);
    EXPECT_FALSE(rep.problems.empty());
}

TEST(Feasibility, NetworkBaselineFeasible) {
    const auto rep = check_feasibility(build_seven_stream_network());
    EXPECT_TRUE(rep.feasible) << feasibility_text(rep);
    EXPECT_EQ(rep.hyperperiod, 60us);
    ASSERT_EQ(rep.max_latency.size(), 7U);
    for (const auto& [id, l] : rep.max_latency) EXPECT_LT(l, 100us) << id;
}

TEST(Feasibility, IgnoresFaultScenario) {
    const auto a = check_feasibility(build_late_frame());
    const auto b = check_feasibility(build_additional());
    EXPECT_TRUE(a.feasible);
    EXPECT_TRUE(b.feasible);
    EXPECT_EQ(feasibility_json(a), feasibility_json(b));
}

TEST(Feasibility, InvalidConfigThrows) {
    auto c = build_no_fault();
    c.gcls[0].gcl.entries.pop_back();
    EXPECT_THROW(check_feasibility(c), ConfigError);
}

TEST(Feasibility, JsonShape) {
    const auto j = feasibility_json(check_feasibility(undersized_slot()));
    for (const char* key : {"\"feasible\"", "\"hyperperiod_ns\"", "\"slot_misses\"", "\"queues\"", "\"max_latency_ns\""}) {
        EXPECT_NE(j.find(key), std::string::npos) << key << "\n" << j;
    }
}

TEST(FeasibilityProperty, IdempotentAndDeterministic) {
    std::mt19937_64 rng(9);
    for (int iter = 0; iter < 20; ++iter) {
        const auto c = testing_support::random_config(rng);
        EXPECT_EQ(feasibility_json(check_feasibility(c)), feasibility_json(check_feasibility(c)));
    }
}

// Feasible configs repeat the same frame events in hyperperiods 2 and 3.
TEST(FeasibilityProperty, SteadyStateIsPeriodic) {
    std::mt19937_64 rng(21);
    std::vector<SimConfig> configs{build_no_fault(), build_delayed_stream(), build_seven_stream_network()};
    for (int i = 0; i < 40; ++i) configs.push_back(testing_support::random_config(rng, {.gates = i % 2 == 0}));
    int feasible = 0;
    for (auto c : configs) {
        const auto rep = check_feasibility(c);
        if (!rep.feasible) continue;
        ++feasible;
        const Nanos H = rep.hyperperiod;
        c.scenario = {};
        c.sim_end = 3 * H;
        const auto r = run(c);
        using Row = std::tuple<Nanos, std::string, std::string, FrameEventKind, int, Bytes, std::string>;
        std::vector<Row> second;
        std::vector<Row> third;
        for (const auto& e : r.trace.frame_events) {
            if (e.time < H || e.time >= 3 * H) continue;
            auto& bucket = e.time < 2 * H ? second : third;
            const Nanos phase = e.time < 2 * H ? e.time - H : e.time - 2 * H;
            bucket.emplace_back(phase, r.trace.name(e.location), r.trace.name(e.stream), e.kind, e.queue, e.size,
                                r.trace.name(e.detail));
        }
        EXPECT_EQ(second, third) << c.name;
    }
    EXPECT_GE(feasible, 10);
}
