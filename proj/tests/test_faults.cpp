#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "tsnsim/engine.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/faults.hpp"

using namespace tsnsim;
using namespace std::chrono_literals;

namespace {

StreamSpec stream(const std::string& id, Nanos period, Nanos offset) {
    StreamSpec s;
    s.stream_id = id;
    s.period = period;
    s.send_offset = offset;
    s.frame_size = 500;
    return s;
}

std::vector<Nanos> times(const std::vector<Emission>& es) {
    std::vector<Nanos> out;
    for (const auto& e : es) out.push_back(e.time);
    return out;
}

FaultAction action(FaultKind kind, const std::string& id) {
    FaultAction a;
    a.kind = kind;
    a.stream_id = id;
    return a;
}

}  // namespace

TEST(Talker, EmissionsFollowPeriodAndOffset) {
    const auto s = stream("A", 60us, 5us);
    const auto es = emit_talker_frames(s, {}, 180us);
    EXPECT_EQ(times(es), (std::vector<Nanos>{5us, 65us, 125us}));
    for (std::size_t i = 0; i < es.size(); ++i) {
        EXPECT_EQ(es[i].frame.seq, i);
        EXPECT_EQ(es[i].frame.created_at, es[i].time);
        EXPECT_EQ(es[i].frame.route, "A");
    }
}

TEST(Talker, ShiftSecondFrame) {
    auto a = action(FaultKind::ShiftFrame, "A");
    a.seq = 2;
    a.shift = 10us;
    const auto es = emit_talker_frames(stream("A", 60us, 5us), {{a}}, 180us);
    EXPECT_EQ(times(es), (std::vector<Nanos>{5us, 65us, 135us}));
    EXPECT_EQ(es[2].frame.created_at, 135us);
}

TEST(Talker, DropFrame) {
    auto a = action(FaultKind::DropFrame, "A");
    a.seq = 1;
    const auto es = emit_talker_frames(stream("A", 60us, 5us), {{a}}, 180us);
    EXPECT_EQ(times(es), (std::vector<Nanos>{5us, 125us}));
    EXPECT_EQ(es[1].frame.seq, 2U);
}

TEST(Talker, ActionsForOtherStreamsIgnored) {
    auto a = action(FaultKind::DropFrame, "B");
    a.seq = 0;
    EXPECT_EQ(emit_talker_frames(stream("A", 60us, 5us), {{a}}, 180us).size(), 3U);
}

TEST(Faults, NearSelectsClosestPeriod) {
    const std::vector<StreamSpec> ss{stream("A", 60us, 45us)};
    auto a = action(FaultKind::ShiftFrame, "A");
    a.near = 10ms;
    a.shift = 10us;
    const auto r = resolve_targets({{a}}, ss);
    // 10 ms - 45 us = 9955 us, 165.9 periods -> 166.
    ASSERT_TRUE(r.actions[0].seq);
    EXPECT_EQ(*r.actions[0].seq, 166U);
    const auto es = apply({{a}}, emit_talker_frames(ss[0], {}, 20ms), ss);
    const auto it = std::find_if(es.begin(), es.end(), [](const Emission& e) { return e.frame.seq == 166; });
    ASSERT_NE(it, es.end());
    EXPECT_EQ(it->time, 45us + 166 * 60us + 10us);
}

TEST(Faults, ShiftStreamFromSeq) {
    const std::vector<StreamSpec> ss{stream("A", 40us, 0us)};
    auto a = action(FaultKind::ShiftStream, "A");
    a.from_seq = 1;
    a.shift = 6us;
    const auto es = apply({{a}}, emit_talker_frames(ss[0], {}, 120us), ss);
    EXPECT_EQ(times(es), (std::vector<Nanos>{0us, 46us, 86us}));
}

TEST(Faults, InjectAddsSyntheticFrame) {
    const std::vector<StreamSpec> ss{stream("blue", 40us, 22us)};
    auto a = action(FaultKind::InjectFrame, "blue");
    a.inject = {42us, 500, 7};
    const auto es = apply({{a}}, emit_talker_frames(ss[0], {}, 120us), ss);
    ASSERT_EQ(es.size(), 4U);
    EXPECT_EQ(times(es), (std::vector<Nanos>{22us, 42us, 62us, 102us}));
    const auto& inj = es[1].frame;
    EXPECT_EQ(inj.stream_id, "inj:blue");
    EXPECT_EQ(inj.route, "blue");
    EXPECT_TRUE(inj.synthetic);
    EXPECT_EQ(inj.seq, 0U);
}

TEST(Faults, InjectSeqIndependentOfListingOrder) {
    const std::vector<StreamSpec> ss{stream("A", 40us, 0us)};
    auto a = action(FaultKind::InjectFrame, "A");
    a.inject = {50us, 100, 7};
    auto b = a;
    b.inject.time = 10us;
    const auto x = apply({{a, b}}, emit_talker_frames(ss[0], {}, 80us), ss);
    const auto y = apply({{b, a}}, emit_talker_frames(ss[0], {}, 80us), ss);
    EXPECT_EQ(x, y);
}

TEST(Faults, UnknownTargetsRejected) {
    const std::vector<StreamSpec> ss{stream("A", 60us, 0us)};
    const auto base = emit_talker_frames(ss[0], {}, 120us);
    auto unknown_stream = action(FaultKind::DropFrame, "Z");
    unknown_stream.seq = 0;
    EXPECT_THROW(apply({{unknown_stream}}, base, ss), ConfigError);
    auto unknown_frame = action(FaultKind::DropFrame, "A");
    unknown_frame.seq = 99;
    EXPECT_THROW(apply({{unknown_frame}}, base, ss), ConfigError);
    auto no_target = action(FaultKind::ShiftFrame, "A");
    EXPECT_THROW(apply({{no_target}}, base, ss), ConfigError);
}

TEST(Faults, KindNames) {
    for (auto k : {FaultKind::DropFrame, FaultKind::InjectFrame, FaultKind::ShiftFrame, FaultKind::ShiftStream}) {
        EXPECT_EQ(fault_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(fault_kind_from_string("Explode"), ConfigError);
}

// Random scenarios: output stays time sorted, and every surviving original
// frame appears exactly once with its own shift applied.
TEST(FaultsProperty, SortedAndAccounted) {
    std::mt19937_64 rng(17);
    for (int iter = 0; iter < 200; ++iter) {
        const std::vector<StreamSpec> ss{stream("A", 60us, Nanos(1000 * static_cast<std::int64_t>(rng() % 60)))};
        const auto base = emit_talker_frames(ss[0], {}, 3ms);
        FaultScenario sc;
        std::map<std::uint64_t, Nanos> shifts;
        std::set<std::uint64_t> drops;
        int injected = 0;
        for (int k = 0; k < 6; ++k) {
            const auto seq = rng() % base.size();
            switch (rng() % 3) {
                case 0: {
                    auto a = action(FaultKind::DropFrame, "A");
                    a.seq = seq;
                    drops.insert(seq);
                    sc.actions.push_back(a);
                    break;
                }
                case 1: {
                    auto a = action(FaultKind::ShiftFrame, "A");
                    a.seq = seq;
                    a.shift = Nanos(static_cast<std::int64_t>(rng() % 50'000) - 25'000);
                    shifts[seq] += a.shift;
                    sc.actions.push_back(a);
                    break;
                }
                default: {
                    auto a = action(FaultKind::InjectFrame, "A");
                    a.inject = {Nanos(static_cast<std::int64_t>(rng() % 3'000'000)), 200, 7};
                    ++injected;
                    sc.actions.push_back(a);
                }
            }
        }
        const auto out = apply(sc, base, ss);
        EXPECT_TRUE(std::is_sorted(out.begin(), out.end(),
                                   [](const Emission& x, const Emission& y) { return x.time < y.time; }));
        EXPECT_EQ(out.size(), base.size() - drops.size() + static_cast<std::size_t>(injected));
        for (const auto& e : out) {
            if (e.frame.synthetic) continue;
            EXPECT_FALSE(drops.contains(e.frame.seq));
            const Nanos expect = base[e.frame.seq].time + (shifts.contains(e.frame.seq) ? shifts[e.frame.seq] : 0ns);
            EXPECT_EQ(e.time, expect);
        }
    }
}
