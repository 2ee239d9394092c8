#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "tsnsim/config.hpp"
#include "tsnsim/scenarios.hpp"
#include "tsnsim/trace.hpp"

using namespace tsnsim;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    const auto d = fs::temp_directory_path() / "tsnsim_cli_test";
    fs::create_directories(d);
    return d;
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + TSNSIM_CLI + "\" " + args + " > \"" +
                            (work_dir() / "stdout.txt").string() + "\" 2> \"" + (work_dir() / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string captured(const char* which) { return read_text_file(work_dir() / which); }

std::string scenario(const std::string& name) { return std::string(TSNSIM_SCENARIO_DIR) + "/" + name; }

}  // namespace

TEST(Cli, RunNoFault) {
    const auto out = work_dir() / "no_fault";
    fs::remove_all(out);
    ASSERT_EQ(cli("run --config " + scenario("no_fault") + " --out " + out.string()), 0) << captured("stderr.txt");
    for (const char* f : {"frames.csv", "latency.csv", "gates.csv", "meters.csv", "summary.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto log = read_trace_dir(out);
    const auto s = occupancy_series(log, kSingleLinkPort, 7);
    for (Nanos t = 30us; t < 3ms; t += 30us) EXPECT_DOUBLE_EQ(s.value_at(t), 0.0);
}

TEST(Cli, RunNetworkLateFrameShowsGrowth) {
    const auto out = work_dir() / "late";
    fs::remove_all(out);
    ASSERT_EQ(cli("run --config " + scenario("network_late_frame.json") + " --out " + out.string() + " --until 200ms"),
              0);
    const auto log = read_trace_dir(out);
    Nanos before{0};
    Nanos after{0};
    for (const auto& l : latency_series(log, "B")) {
        if (!l.delivered) continue;
        (l.emitted < 10ms ? before : after) = std::max(l.emitted < 10ms ? before : after, l.latency);
    }
    EXPECT_GT(after, 10 * before);
}

TEST(Cli, RunInvalidConfig) {
    auto c = build_no_fault();
    c.gcls[0].gcl.entries = {{0us, 20us, 0x80}};
    const auto path = work_dir() / "gap.json";
    write_text_file(path, dump_config(c));
    EXPECT_EQ(cli("run --config " + path.string() + " --out " + (work_dir() / "gap").string()), 1);
    EXPECT_NE(captured("stderr.txt").find("GCL gap"), std::string::npos);
}

TEST(Cli, RunMissingConfigIsIoError) { EXPECT_EQ(cli("run --config /nonexistent/x.json"), 2); }

TEST(Cli, RunBadUntil) { EXPECT_EQ(cli("run --config " + scenario("no_fault") + " --until soon"), 1); }

TEST(Cli, RunBatchWithJobs) {
    const auto out = work_dir() / "batch";
    fs::remove_all(out);
    ASSERT_EQ(cli("run --jobs 3 --config " + scenario("no_fault") + " --config " + scenario("early") + " --config " +
                  scenario("missing") + " --out " + out.string()),
              0);
    for (const char* n : {"no_fault", "early", "missing"}) EXPECT_TRUE(fs::exists(out / n / "frames.csv")) << n;
}

TEST(Cli, ValidateNetwork) {
    const auto report = work_dir() / "report.json";
    EXPECT_EQ(cli("validate --config " + scenario("network_baseline") + " --report " + report.string()), 0);
    EXPECT_NE(read_text_file(report).find("\"feasible\": true"), std::string::npos);
}

TEST(Cli, ValidateUndersizedSlot) {
    auto c = build_no_fault();
    c.gcls[0].gcl = gcl_from_windows(30us, 7, {{12us, 16us}});
    const auto path = work_dir() / "short.json";
    write_text_file(path, dump_config(c));
    EXPECT_EQ(cli("validate --config " + path.string()), 1);
    EXPECT_NE(captured("stdout.txt").find("slot misses"), std::string::npos);
}

TEST(Cli, ValidateMalformed) {
    const auto path = work_dir() / "bad.json";
    write_text_file(path, "{ nope");
    EXPECT_EQ(cli("validate --config " + path.string()), 1);
    EXPECT_NE(captured("stderr.txt").find("malformed"), std::string::npos);
}

TEST(Cli, PlotQueueAndLatency) {
    const auto out = work_dir() / "plot_src";
    fs::remove_all(out);
    ASSERT_EQ(cli("run --config " + scenario("no_fault") + " --out " + out.string()), 0);
    const auto q = work_dir() / "queue.svg";
    EXPECT_EQ(cli("plot --trace " + out.string() + " --out " + q.string() + " --select \"BR->L:7\" --to 120us"), 0)
        << captured("stderr.txt");
    const auto svg = read_text_file(q);
    EXPECT_EQ(svg.rfind("<svg", 0), 0U);
    EXPECT_NE(svg.find("magenta"), std::string::npos);
    const auto l = work_dir() / "latency.svg";
    EXPECT_EQ(cli("plot --trace " + out.string() + " --out " + l.string()), 0);
    EXPECT_NE(read_text_file(l).find("blue"), std::string::npos);
    EXPECT_EQ(cli("plot --trace " + out.string() + " --out " + l.string() + " --select \"X->Y:7\""), 1);
    EXPECT_EQ(cli("plot --trace /nonexistent --out " + l.string()), 2);
}

TEST(Cli, ScenariosWriteMatchesCheckedIn) {
    const auto dir = work_dir() / "scenarios";
    fs::remove_all(dir);
    ASSERT_EQ(cli("scenarios --write " + dir.string()), 0);
    for (const auto& n : scenario_names()) {
        EXPECT_EQ(read_text_file(dir / (n + ".json")), read_text_file(fs::path(TSNSIM_SCENARIO_DIR) / (n + ".json")))
            << n;
    }
    EXPECT_EQ(cli("scenarios --list"), 0);
    EXPECT_NE(captured("stdout.txt").find("network_late_frame_psfp"), std::string::npos);
}

TEST(Cli, UnknownSubcommand) { EXPECT_EQ(cli("frobnicate"), 1); }
