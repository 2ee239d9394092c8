#include <gtest/gtest.h>

#include "tsnsim/engine.hpp"
#include "tsnsim/scenarios.hpp"
#include "tsnsim/svg.hpp"

using namespace tsnsim;
using namespace std::chrono_literals;

namespace {

std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
}

}  // namespace

TEST(Svg, NoFaultQueueChart) {
    const auto r = run(build_no_fault());
    std::vector<OccupancySeries> layers;
    for (const char* id : {"blue", "magenta"}) layers.push_back(occupancy_series(r.trace, kSingleLinkPort, 7, std::string(id)));
    ChartOptions opt;
    opt.title = "BR->L queue 7";
    opt.to = 120us;
    opt.marker_interval = 30us;
    const auto svg = render_occupancy_svg(layers, gate_band(r.trace, kSingleLinkPort, 7), opt);
    EXPECT_EQ(svg.rfind("<svg", 0), 0U);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(count(svg, "<polygon"), 2U);
    EXPECT_NE(svg.find("#3aa655"), std::string::npos);  // open band
    EXPECT_NE(svg.find("#d93b3b"), std::string::npos);  // closed band
    EXPECT_NE(svg.find("BR-&gt;L queue 7"), std::string::npos);
    EXPECT_GE(count(svg, "stroke-dasharray"), 1U);
    EXPECT_EQ(svg.find("http://"), svg.find("http://www.w3.org/2000/svg"));  // no external assets
}

TEST(Svg, EmptySeriesDrawsAxesAndBand) {
    ChartOptions opt;
    opt.from = 0ns;
    opt.to = 60us;
    const std::vector<std::pair<Nanos, bool>> band{{0ns, true}, {30us, false}};
    const auto svg = render_occupancy_svg({}, band, opt);
    EXPECT_EQ(count(svg, "<polygon"), 0U);
    EXPECT_GE(count(svg, "<line"), 2U);
    EXPECT_NE(svg.find("#3aa655"), std::string::npos);
}

TEST(Svg, MarkersAtInterval) {
    ChartOptions opt;
    opt.from = 0ns;
    opt.to = 600us;
    opt.marker_interval = 120us;
    const auto svg = render_occupancy_svg({}, {}, opt);
    const auto group = svg.find("stroke-dasharray");
    ASSERT_NE(group, std::string::npos);
    const auto close = svg.find("</g>", group);
    EXPECT_EQ(count(svg.substr(group, close - group), "<line"), 6U);  // 0, 120, ..., 600
}

TEST(Svg, LatencyChartWithDrops) {
    auto c = bundled_scenario("network_late_frame_psfp").config;
    c.sim_end = 20ms;
    const auto r = run(c);
    std::map<StreamId, std::vector<LatencySample>> series;
    for (const auto& id : streams_in(r.trace)) series[id] = latency_series(r.trace, id);
    const auto svg = render_latency_svg(series, {});
    EXPECT_EQ(count(svg, "<polyline"), 7U);
    EXPECT_EQ(svg, render_latency_svg(series, {}));
    for (std::size_t k = 0; k < 7; ++k) EXPECT_NE(svg.find(stream_color(k)), std::string::npos);
}
