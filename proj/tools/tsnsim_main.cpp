// tsnsim command line: run, validate, plot, scenarios.
//
// Exit codes: 0 success / feasible, 1 invalid input or infeasible schedule,
// 2 file system error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsnsim/config.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/scenarios.hpp"
#include "tsnsim/svg.hpp"
#include "tsnsim/validator.hpp"

namespace fs = std::filesystem;
using namespace tsnsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

// "scenarios/no_fault" resolves to "scenarios/no_fault.json".
fs::path resolve_config(const std::string& arg) {
    fs::path p(arg);
    if (fs::exists(p)) return p;
    if (p.extension() != ".json") {
        fs::path with = p;
        with += ".json";
        if (fs::exists(with)) return with;
    }
    throw IoError("config '" + arg + "' not found");
}

nlohmann::ordered_json summary_json(const SimConfig& cfg, const RunResult& r, bool stamp) {
    nlohmann::ordered_json j;
    j["name"] = cfg.name;
    j["sim_end_ns"] = cfg.sim_end.count();
    j["hyperperiod_ns"] = schedule_hyperperiod(cfg).count();
    std::set<Nanos> periods;
    for (const auto& s : cfg.streams) periods.insert(s.period);
    // Period markers when every stream shares one period, hyperperiod otherwise.
    j["marker_interval_ns"] = periods.size() == 1 ? periods.begin()->count() : schedule_hyperperiod(cfg).count();
    j["events_dispatched"] = r.stats.events_dispatched;
    j["guard_deferrals"] = r.stats.guard_deferrals;
    auto stats = [](const StreamStats& s) {
        return nlohmann::ordered_json{{"emitted", s.emitted},
                                      {"delivered", s.delivered},
                                      {"dropped_psfp", s.dropped_psfp},
                                      {"dropped_overflow", s.dropped_overflow},
                                      {"dropped_forwarding", s.dropped_forwarding},
                                      {"in_flight", s.in_flight}};
    };
    auto& streams = j["streams"] = nlohmann::ordered_json::object();
    for (const auto& [id, s] : r.stats.per_stream) {
        auto entry = stats(s);
        Nanos lo = kNever;
        Nanos hi{0};
        long double sum = 0;
        std::uint64_t n = 0;
        for (const auto& l : latency_series(r.trace, id)) {
            if (!l.delivered) continue;
            lo = std::min(lo, l.latency);
            hi = std::max(hi, l.latency);
            sum += l.latency.count();
            ++n;
        }
        if (n > 0) {
            entry["latency_min_ns"] = lo.count();
            entry["latency_max_ns"] = hi.count();
            entry["latency_mean_ns"] = static_cast<double>(sum / n);
        }
        streams[id] = entry;
    }
    j["total"] = stats(r.stats.total);
    if (stamp) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["generated_at"] = buf;
    }
    return j;
}

struct RunJob {
    std::string config_arg;
    fs::path out_dir;
};

struct RunOutcome {
    int code = kExitOk;
    std::string report;  // stdout
    std::string error;   // stderr
};

RunOutcome run_one(const RunJob& job, const std::optional<Nanos>& until, bool stamp) {
    RunOutcome o;
    try {
        SimConfig cfg = load_config(resolve_config(job.config_arg));
        if (until) cfg.sim_end = *until;
        const auto diagnostics = validate_config(cfg);
        if (!diagnostics.empty()) {
            o.code = kExitInvalid;
            o.error = job.config_arg + ": invalid configuration\n" + format_diagnostics(diagnostics) + "\n";
            return o;
        }
        const auto result = run(cfg);
        export_csv(result.trace, job.out_dir);
        const auto summary = summary_json(cfg, result, stamp);
        write_text_file(job.out_dir / "summary.json", summary.dump(2) + "\n");

        std::ostringstream ss;
        ss << cfg.name << ": " << result.stats.total.emitted << " emitted, " << result.stats.total.delivered
           << " delivered, " << result.stats.total.dropped() << " dropped, " << result.stats.total.in_flight
           << " in flight -> " << job.out_dir.string() << "\n";
        for (const auto& [id, s] : summary["streams"].items()) {
            ss << "  " << id << ": delivered " << s["delivered"].get<std::uint64_t>();
            if (s.contains("latency_max_ns")) {
                ss << ", latency " << format_duration(Nanos(s["latency_min_ns"].get<std::int64_t>())) << " .. "
                   << format_duration(Nanos(s["latency_max_ns"].get<std::int64_t>()));
            }
            ss << "\n";
        }
        o.report = ss.str();
    } catch (const IoError& e) {
        o.code = kExitIo;
        o.error = std::string("error: ") + e.what() + "\n";
    } catch (const ConfigError& e) {
        o.code = kExitInvalid;
        o.error = job.config_arg + ": " + e.what() + "\n";
    }
    return o;
}

int cmd_run(const std::vector<std::string>& configs, const std::string& out, const std::string& until_arg,
            unsigned jobs, bool stamp) {
    std::optional<Nanos> until;
    if (!until_arg.empty()) {
        try {
            until = parse_duration(until_arg);
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: --until: " << e.what() << "\n";
            return kExitInvalid;
        }
    }
    std::vector<RunJob> work;
    for (const auto& c : configs) {
        fs::path dir(out);
        if (configs.size() > 1) dir /= fs::path(c).stem();
        work.push_back({c, dir});
    }
    std::vector<RunOutcome> outcomes(work.size());
    const unsigned n = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) outcomes[i] = run_one(work[i], until, stamp);
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kExitOk;
    for (const auto& o : outcomes) {
        std::cout << o.report;
        std::cerr << o.error;
        code = std::max(code, o.code);
    }
    return code;
}

int cmd_validate(const std::string& config, const std::string& report_path) {
    SimConfig cfg;
    try {
        cfg = load_config(resolve_config(config));
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << config << ": " << e.what() << "\n";
        return kExitInvalid;
    }
    auto diagnostics = validate_config(cfg);
    std::erase_if(diagnostics, [](const Diagnostic& d) { return d.code == "sim_end"; });
    if (!diagnostics.empty()) {
        std::cout << "invalid configuration\n" << format_diagnostics(diagnostics) << "\n";
        if (!report_path.empty()) {
            nlohmann::ordered_json j;
            j["valid"] = false;
            auto& arr = j["diagnostics"] = nlohmann::ordered_json::array();
            for (const auto& d : diagnostics) arr.push_back({{"code", d.code}, {"message", d.message}});
            try {
                write_text_file(report_path, j.dump(2) + "\n");
            } catch (const IoError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitIo;
            }
        }
        return kExitInvalid;
    }
    const auto rep = check_feasibility(cfg);
    std::cout << feasibility_text(rep);
    if (!report_path.empty()) {
        try {
            write_text_file(report_path, feasibility_json(rep));
        } catch (const IoError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitIo;
        }
    }
    return rep.feasible ? kExitOk : kExitInvalid;
}

int cmd_plot(const std::string& trace_dir, const std::string& out, const std::string& select,
             const std::string& from_arg, const std::string& to_arg) {
    TraceLog log;
    ChartOptions opt;
    try {
        log = read_trace_dir(trace_dir);
        const fs::path summary = fs::path(trace_dir) / "summary.json";
        if (fs::exists(summary)) {
            const auto j = nlohmann::json::parse(read_text_file(summary), nullptr, false);
            if (!j.is_discarded() && j.contains("marker_interval_ns")) {
                opt.marker_interval = Nanos(j["marker_interval_ns"].get<std::int64_t>());
            }
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    try {
        if (!from_arg.empty()) opt.from = parse_duration(from_arg);
        if (!to_arg.empty()) opt.to = parse_duration(to_arg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }

    std::string svg;
    try {
        if (select.empty() || select.rfind("latency", 0) == 0) {
            std::vector<StreamId> ids;
            if (select.size() > 8 && select[7] == ':') {
                std::stringstream ss(select.substr(8));
                for (std::string id; std::getline(ss, id, ',');) {
                    if (!id.empty()) ids.push_back(id);
                }
            } else {
                ids = streams_in(log);
            }
            std::map<StreamId, std::vector<LatencySample>> series;
            for (const auto& id : ids) series[id] = latency_series(log, id);
            opt.title = "end-to-end latency";
            svg = render_latency_svg(series, opt);
        } else {
            const auto colon = select.rfind(':');
            if (colon == std::string::npos) {
                std::cerr << "error: --select expects PORT:QUEUE or latency[:IDS]\n";
                return kExitInvalid;
            }
            const std::string port = select.substr(0, colon);
            const int queue = std::stoi(select.substr(colon + 1));
            occupancy_series(log, port, queue);  // throws for an unknown port
            std::vector<OccupancySeries> layers;
            std::set<StreamId> present;
            const auto port_id = log.find(port);
            for (const auto& e : log.frame_events) {
                if (port_id && e.location == *port_id && e.queue == queue) present.insert(log.name(e.stream));
            }
            for (const auto& id : present) layers.push_back(occupancy_series(log, port, queue, id));
            opt.title = port + " queue " + std::to_string(queue);
            svg = render_occupancy_svg(layers, gate_band(log, port, queue), opt);
        }
    } catch (const QueryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::invalid_argument&) {
        std::cerr << "error: bad queue number in --select\n";
        return kExitInvalid;
    }
    try {
        write_text_file(out, svg);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

int cmd_scenarios(bool list, const std::string& write_dir) {
    if (list || write_dir.empty()) {
        for (const auto& n : scenario_names()) std::cout << n << "\n";
    }
    if (!write_dir.empty()) {
        try {
            fs::create_directories(write_dir);
            for (const auto& n : scenario_names()) {
                write_text_file(fs::path(write_dir) / (n + ".json"), dump_config(bundled_scenario(n).config));
            }
        } catch (const IoError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitIo;
        } catch (const fs::filesystem_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitIo;
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for time-aware shaped TSN networks"};
    app.require_subcommand(1);

    std::vector<std::string> run_configs;
    std::string run_out = "out";
    std::string run_until;
    std::uint64_t run_seed = 0;
    unsigned run_jobs = 1;
    bool run_stamp = false;
    auto* run_cmd = app.add_subcommand("run", "simulate one or more configs and write CSV traces");
    run_cmd->add_option("--config", run_configs, "config file (repeatable)")->required();
    run_cmd->add_option("--out", run_out, "output directory");
    run_cmd->add_option("--until", run_until, "override sim_end, e.g. 600ms");
    run_cmd->add_option("--seed", run_seed, "reserved; runs are deterministic");
    run_cmd->add_option("--jobs", run_jobs, "configs simulated in parallel")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--stamp", run_stamp, "record the wall-clock time in summary.json");

    std::string val_config;
    std::string val_report;
    auto* val_cmd = app.add_subcommand("validate", "check a config and the feasibility of its schedule");
    val_cmd->add_option("--config", val_config, "config file")->required();
    val_cmd->add_option("--report", val_report, "write a JSON report here");

    std::string plot_trace;
    std::string plot_out;
    std::string plot_select;
    std::string plot_from;
    std::string plot_to;
    auto* plot_cmd = app.add_subcommand("plot", "render an SVG chart from a trace directory");
    plot_cmd->add_option("--trace", plot_trace, "directory written by 'run'")->required();
    plot_cmd->add_option("--out", plot_out, "SVG file")->required();
    plot_cmd->add_option("--select", plot_select, "PORT:QUEUE (e.g. BR->L:7), or latency[:A,B,...]; default: latency of all streams");
    plot_cmd->add_option("--from", plot_from, "window start");
    plot_cmd->add_option("--to", plot_to, "window end");

    bool sc_list = false;
    std::string sc_write;
    auto* sc_cmd = app.add_subcommand("scenarios", "list or export the bundled scenarios");
    sc_cmd->add_flag("--list", sc_list, "print scenario names");
    sc_cmd->add_option("--write", sc_write, "write every scenario as <dir>/<name>.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalid;
    }

    (void)run_seed;
    if (*run_cmd) return cmd_run(run_configs, run_out, run_until, run_jobs, run_stamp);
    if (*val_cmd) return cmd_validate(val_config, val_report);
    if (*plot_cmd) return cmd_plot(plot_trace, plot_out, plot_select, plot_from, plot_to);
    if (*sc_cmd) return cmd_scenarios(sc_list, sc_write);
    return kExitInvalid;
}
