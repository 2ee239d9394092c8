#include <charconv>
#include <fstream>
#include <sstream>

#include "tsnsim/trace.hpp"

namespace tsnsim {

namespace {

void put_field(std::string& out, std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        out.append(s);
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

template <typename Int>
void put_int(std::string& out, Int v) {
    out.append(std::to_string(v));
}

/// Splits one CSV record; handles quoted fields.
std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back().push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back().push_back(c);
        }
    }
    return fields;
}

template <typename Fn>
void for_each_record(std::string_view text, std::string_view header, std::size_t columns, Fn&& fn) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (line_no == 1) {
            if (line != header) throw IoError("unexpected CSV header '" + std::string(line) + "'");
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_record(line);
        if (fields.size() != columns) {
            throw IoError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                          " fields, got " + std::to_string(fields.size()));
        }
        fn(fields, line_no);
    }
}

template <typename Int>
Int parse_int(const std::string& s, std::size_t line_no) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw IoError("CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    }
    return v;
}

constexpr std::string_view kFramesHeader = "time_ns,node,stream_id,seq,event,queue,size_bytes,detail";
constexpr std::string_view kLatencyHeader = "stream_id,seq,emit_ns,deliver_ns,latency_ns,dropped";
constexpr std::string_view kGatesHeader = "time_ns,port,queue,state";
constexpr std::string_view kMetersHeader = "time_ns,meter,stream_id,seq,color";

Color color_from_string(const std::string& s, std::size_t line_no) {
    if (s == "green") return Color::Green;
    if (s == "yellow") return Color::Yellow;
    if (s == "red") return Color::Red;
    throw IoError("CSV line " + std::to_string(line_no) + ": bad color '" + s + "'");
}

}  // namespace

std::string frames_csv(const TraceLog& log) {
    std::string out(kFramesHeader);
    out.push_back('\n');
    for (const auto& e : log.frame_events) {
        put_int(out, e.time.count());
        out.push_back(',');
        put_field(out, log.name(e.location));
        out.push_back(',');
        put_field(out, log.name(e.stream));
        out.push_back(',');
        put_int(out, e.seq);
        out.push_back(',');
        out.append(to_string(e.kind));
        out.push_back(',');
        if (e.queue >= 0) put_int(out, static_cast<int>(e.queue));
        out.push_back(',');
        put_int(out, e.size);
        out.push_back(',');
        put_field(out, log.name(e.detail));
        out.push_back('\n');
    }
    return out;
}

std::string latency_csv(const TraceLog& log) {
    std::string out(kLatencyHeader);
    out.push_back('\n');
    for (const auto& stream : streams_in(log)) {
        for (const auto& s : latency_series(log, stream)) {
            put_field(out, stream);
            out.push_back(',');
            put_int(out, s.seq);
            out.push_back(',');
            put_int(out, s.emitted.count());
            out.push_back(',');
            if (s.delivered) put_int(out, s.delivered->count());
            out.push_back(',');
            if (s.delivered) put_int(out, s.latency.count());
            out.push_back(',');
            if (s.dropped) put_field(out, s.drop_reason.empty() ? std::string("1") : s.drop_reason);
            out.push_back('\n');
        }
    }
    return out;
}

std::string gates_csv(const TraceLog& log) {
    std::string out(kGatesHeader);
    out.push_back('\n');
    for (const auto& g : log.gate_events) {
        put_int(out, g.time.count());
        out.push_back(',');
        put_field(out, log.name(g.port));
        out.push_back(',');
        if (g.queue >= 0) put_int(out, static_cast<int>(g.queue));
        out.push_back(',');
        out.append(g.open ? "open" : "closed");
        out.push_back('\n');
    }
    return out;
}

std::string meters_csv(const TraceLog& log) {
    std::string out(kMetersHeader);
    out.push_back('\n');
    for (const auto& m : log.meter_events) {
        put_int(out, m.time.count());
        out.push_back(',');
        put_field(out, log.name(m.meter));
        out.push_back(',');
        put_field(out, log.name(m.stream));
        out.push_back(',');
        put_int(out, m.seq);
        out.push_back(',');
        out.append(to_string(m.color));
        out.push_back('\n');
    }
    return out;
}

void parse_frames_csv(std::string_view text, TraceLog& into) {
    for_each_record(text, kFramesHeader, 8, [&](const std::vector<std::string>& f, std::size_t ln) {
        FrameEvent e;
        e.time = Nanos(parse_int<std::int64_t>(f[0], ln));
        e.location = into.intern(f[1]);
        e.stream = into.intern(f[2]);
        e.seq = parse_int<std::uint64_t>(f[3], ln);
        try {
            e.kind = frame_event_kind_from_string(f[4]);
        } catch (const QueryError& ex) {
            throw IoError("CSV line " + std::to_string(ln) + ": " + ex.what());
        }
        e.queue = f[5].empty() ? std::int8_t{-1} : static_cast<std::int8_t>(parse_int<int>(f[5], ln));
        e.size = parse_int<Bytes>(f[6], ln);
        e.detail = into.intern(f[7]);
        into.frame_events.push_back(e);
    });
}

void parse_gates_csv(std::string_view text, TraceLog& into) {
    for_each_record(text, kGatesHeader, 4, [&](const std::vector<std::string>& f, std::size_t ln) {
        GateEvent g;
        g.time = Nanos(parse_int<std::int64_t>(f[0], ln));
        g.port = into.intern(f[1]);
        g.queue = f[2].empty() ? std::int8_t{-1} : static_cast<std::int8_t>(parse_int<int>(f[2], ln));
        if (f[3] == "open") {
            g.open = true;
        } else if (f[3] == "closed") {
            g.open = false;
        } else {
            throw IoError("CSV line " + std::to_string(ln) + ": bad gate state '" + f[3] + "'");
        }
        into.gate_events.push_back(g);
    });
}

void parse_meters_csv(std::string_view text, TraceLog& into) {
    for_each_record(text, kMetersHeader, 5, [&](const std::vector<std::string>& f, std::size_t ln) {
        MeterEvent m;
        m.time = Nanos(parse_int<std::int64_t>(f[0], ln));
        m.meter = into.intern(f[1]);
        m.stream = into.intern(f[2]);
        m.seq = parse_int<std::uint64_t>(f[3], ln);
        m.color = color_from_string(f[4], ln);
        into.meter_events.push_back(m);
    });
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return ss.str();
}

void export_csv(const TraceLog& log, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    write_text_file(dir / "frames.csv", frames_csv(log));
    write_text_file(dir / "latency.csv", latency_csv(log));
    write_text_file(dir / "gates.csv", gates_csv(log));
    write_text_file(dir / "meters.csv", meters_csv(log));
}

TraceLog read_trace_dir(const std::filesystem::path& dir) {
    TraceLog log;
    parse_frames_csv(read_text_file(dir / "frames.csv"), log);
    if (std::filesystem::exists(dir / "gates.csv")) parse_gates_csv(read_text_file(dir / "gates.csv"), log);
    if (std::filesystem::exists(dir / "meters.csv")) parse_meters_csv(read_text_file(dir / "meters.csv"), log);
    return log;
}

}  // namespace tsnsim
