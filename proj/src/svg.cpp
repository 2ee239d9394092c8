#include "tsnsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace tsnsim {

namespace {

constexpr int kLeft = 70;
constexpr int kRight = 150;  // room for the legend
constexpr int kTop = 36;
constexpr int kBottom = 56;
constexpr int kBand = 10;

const char* const kPalette[] = {"#d1279b", "#2463c9", "#f08a1c", "#2e9e4f", "#8a4fc7",
                                "#c93a3a", "#1a9fb0", "#7a6a2a", "#555555", "#e377c2"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s == "-0" ? "0" : s;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// Round step (1, 2 or 5 times a power of ten) giving about `target` ticks.
double nice_step(double span, int target) {
    if (span <= 0) return 1;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10 * mag;
}

std::string time_label(double ns) {
    if (ns == 0) return "0";
    if (std::fabs(ns) >= 1e6) return num(ns / 1e6) + " ms";
    if (std::fabs(ns) >= 1e3) return num(ns / 1e3) + " us";
    return num(ns) + " ns";
}

class Canvas {
public:
    Canvas(const ChartOptions& o, double t0, double t1, double ymax)
        : o_(o), t0_(t0), t1_(t1 > t0 ? t1 : t0 + 1), ymax_(ymax > 0 ? ymax : 1) {}

    double x(double t) const { return kLeft + (t - t0_) / (t1_ - t0_) * plot_w(); }
    double y(double v) const { return kTop + plot_h() - v / ymax_ * plot_h(); }
    double plot_w() const { return o_.width - kLeft - kRight; }
    double plot_h() const { return o_.height - kTop - kBottom; }
    double t0() const { return t0_; }
    double t1() const { return t1_; }

    void open(std::ostringstream& s) const {
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o_.width << "\" height=\"" << o_.height
          << "\" viewBox=\"0 0 " << o_.width << " " << o_.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (!o_.title.empty()) {
            s << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << escape(o_.title) << "</text>\n";
        }
        s << "<defs><clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(plot_w())
          << "\" height=\"" << num(plot_h()) << "\"/></clipPath></defs>\n";
    }

    void axes(std::ostringstream& s, const std::string& ylabel, bool y_is_time) const {
        const double base = kTop + plot_h();
        s << "<g stroke=\"#222\" fill=\"none\">";
        s << "<line x1=\"" << kLeft << "\" y1=\"" << num(base) << "\" x2=\"" << num(kLeft + plot_w()) << "\" y2=\""
          << num(base) << "\"/>";
        s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << num(base) << "\"/>";
        s << "</g>\n";

        const double xs = nice_step(t1_ - t0_, 8);
        s << "<g fill=\"#222\" text-anchor=\"middle\">";
        for (double t = std::ceil(t0_ / xs) * xs; t <= t1_ + 1e-9; t += xs) {
            s << "<text x=\"" << num(x(t)) << "\" y=\"" << num(base + kBand + 16) << "\">" << time_label(t)
              << "</text>";
        }
        s << "</g>\n";
        const double ys = nice_step(ymax_, 5);
        s << "<g fill=\"#222\" text-anchor=\"end\">";
        for (double v = 0; v <= ymax_ + 1e-9; v += ys) {
            s << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y(v) + 4) << "\">"
              << (y_is_time ? time_label(v) : num(v)) << "</text>";
        }
        s << "</g>\n";
        s << "<text x=\"14\" y=\"" << num(kTop + plot_h() / 2) << "\" transform=\"rotate(-90 14 "
          << num(kTop + plot_h() / 2) << ")\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
    }

    void markers(std::ostringstream& s) const {
        if (!o_.marker_interval || o_.marker_interval->count() <= 0) return;
        const double step = static_cast<double>(o_.marker_interval->count());
        if ((t1_ - t0_) / step > 400) return;  // too dense to be useful
        s << "<g stroke=\"#444\" stroke-dasharray=\"4 3\">";
        for (double t = std::ceil(t0_ / step) * step; t <= t1_ + 1e-9; t += step) {
            s << "<line x1=\"" << num(x(t)) << "\" y1=\"" << kTop << "\" x2=\"" << num(x(t)) << "\" y2=\""
              << num(kTop + plot_h()) << "\"/>";
        }
        s << "</g>\n";
    }

    void legend(std::ostringstream& s, const std::vector<std::pair<std::string, std::string>>& entries) const {
        const double lx = kLeft + plot_w() + 16;
        double ly = kTop + 6;
        for (const auto& [label, color] : entries) {
            s << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\"" << color
              << "\"/><text x=\"" << num(lx + 18) << "\" y=\"" << num(ly + 10) << "\">" << escape(label)
              << "</text>\n";
            ly += 18;
        }
    }

private:
    const ChartOptions& o_;
    double t0_;
    double t1_;
    double ymax_;
};

}  // namespace

std::string stream_color(std::size_t rank) { return kPalette[rank % (sizeof kPalette / sizeof kPalette[0])]; }

std::string render_occupancy_svg(const std::vector<OccupancySeries>& layers_in,
                                 const std::vector<std::pair<Nanos, bool>>& band, const ChartOptions& o) {
    auto layers = layers_in;
    std::sort(layers.begin(), layers.end(), [](const OccupancySeries& a, const OccupancySeries& b) {
        return a.stream.value_or("") < b.stream.value_or("");
    });

    // Union of breakpoints; every layer is linear between them.
    std::set<Nanos> times;
    for (const auto& l : layers) {
        for (const auto& p : l.points) times.insert(p.time);
    }
    for (const auto& [t, open] : band) times.insert(t);

    const Nanos data_end = times.empty() ? Nanos(1) : *times.rbegin();
    const Nanos from = o.from.value_or(Nanos::zero());
    const Nanos to = o.to.value_or(data_end > from ? data_end : from + Nanos(1));
    times.insert(from);
    times.insert(to);

    struct Column {
        Nanos t;
        std::vector<double> before;  // cumulative, left limit
        std::vector<double> after;   // cumulative, value at t
    };
    std::vector<Column> cols;
    double ymax = 0;
    for (Nanos t : times) {
        if (t < from || t > to) continue;
        Column c{t, {}, {}};
        double b = 0;
        double a = 0;
        for (const auto& l : layers) {
            b += l.value_before(t);
            a += l.value_at(t);
            c.before.push_back(b);
            c.after.push_back(a);
        }
        ymax = std::max({ymax, b, a});
        cols.push_back(std::move(c));
    }
    ymax = ymax > 0 ? ymax * 1.1 : 1000;

    Canvas f(o, static_cast<double>(from.count()), static_cast<double>(to.count()), ymax);
    std::ostringstream s;
    f.open(s);
    f.axes(s, "queue occupancy [bytes]", false);

    // Gate band below the axis.
    {
        const double y0 = kTop + f.plot_h() + 2;
        bool state = false;
        Nanos start = from;
        for (const auto& [t, open] : band) {
            if (t <= from) {
                state = open;
                continue;
            }
            if (t >= to) break;
            s << "<rect x=\"" << num(f.x(static_cast<double>(start.count()))) << "\" y=\"" << num(y0)
              << "\" width=\"" << num(f.x(static_cast<double>(t.count())) - f.x(static_cast<double>(start.count())))
              << "\" height=\"" << kBand << "\" fill=\"" << (state ? "#3aa655" : "#d93b3b") << "\"/>\n";
            start = t;
            state = open;
        }
        if (!band.empty()) {
            s << "<rect x=\"" << num(f.x(static_cast<double>(start.count()))) << "\" y=\"" << num(y0)
              << "\" width=\"" << num(f.x(static_cast<double>(to.count())) - f.x(static_cast<double>(start.count())))
              << "\" height=\"" << kBand << "\" fill=\"" << (state ? "#3aa655" : "#d93b3b") << "\"/>\n";
        }
    }

    std::vector<std::pair<std::string, std::string>> legend;
    s << "<g clip-path=\"url(#plot)\">\n";
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto color = stream_color(k);
        legend.emplace_back(layers[k].stream.value_or("queue"), color);
        std::ostringstream pts;
        // Upper edge left to right, lower edge right to left.
        for (const auto& c : cols) {
            const double x = f.x(static_cast<double>(c.t.count()));
            pts << num(x) << "," << num(f.y(c.before[k])) << " ";
            if (c.after[k] != c.before[k]) pts << num(x) << "," << num(f.y(c.after[k])) << " ";
        }
        for (auto it = cols.rbegin(); it != cols.rend(); ++it) {
            const double x = f.x(static_cast<double>(it->t.count()));
            const double lo_after = k == 0 ? 0.0 : it->after[k - 1];
            const double lo_before = k == 0 ? 0.0 : it->before[k - 1];
            pts << num(x) << "," << num(f.y(lo_after)) << " ";
            if (lo_after != lo_before) pts << num(x) << "," << num(f.y(lo_before)) << " ";
        }
        s << "<polygon fill=\"" << color << "\" fill-opacity=\"0.85\" stroke=\"none\" points=\"" << pts.str()
          << "\"/>\n";
    }
    s << "</g>\n";
    f.markers(s);
    f.legend(s, legend);
    s << "</svg>\n";
    return s.str();
}

std::string render_latency_svg(const std::map<StreamId, std::vector<LatencySample>>& series, const ChartOptions& o) {
    double tmin = 0;
    double tmax = 1;
    double ymax = 0;
    bool first = true;
    for (const auto& [id, samples] : series) {
        for (const auto& l : samples) {
            const double t = static_cast<double>(l.emitted.count());
            if (first) {
                tmin = tmax = t;
                first = false;
            }
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
            if (l.delivered) ymax = std::max(ymax, static_cast<double>(l.latency.count()));
        }
    }
    if (o.from) tmin = static_cast<double>(o.from->count());
    if (o.to) tmax = static_cast<double>(o.to->count());
    ymax = ymax > 0 ? ymax * 1.1 : 1000;

    Canvas f(o, tmin, tmax, ymax);
    std::ostringstream s;
    f.open(s);
    f.axes(s, "end-to-end latency", true);
    f.markers(s);

    std::vector<std::pair<std::string, std::string>> legend;
    std::size_t rank = 0;
    s << "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (const auto& [id, samples] : series) {
        const auto color = stream_color(rank++);
        legend.emplace_back(id, color);
        std::ostringstream pts;
        std::ostringstream drops;
        // Thin out long series to about two points per pixel column.
        const std::size_t stride = std::max<std::size_t>(1, samples.size() / (2 * static_cast<std::size_t>(f.plot_w())));
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& l = samples[i];
            const double x = f.x(static_cast<double>(l.emitted.count()));
            if (l.dropped) {
                const double y = kTop + f.plot_h();
                drops << "M" << num(x - 3) << "," << num(y - 3) << "L" << num(x + 3) << "," << num(y + 3) << "M"
                      << num(x - 3) << "," << num(y + 3) << "L" << num(x + 3) << "," << num(y - 3);
                continue;
            }
            if (!l.delivered || (i % stride != 0 && i + 1 != samples.size())) continue;
            pts << num(x) << "," << num(f.y(static_cast<double>(l.latency.count()))) << " ";
        }
        s << "<polyline stroke=\"" << color << "\" points=\"" << pts.str() << "\"/>\n";
        if (!drops.str().empty()) s << "<path stroke=\"" << color << "\" d=\"" << drops.str() << "\"/>\n";
    }
    s << "</g>\n";
    f.legend(s, legend);
    s << "</svg>\n";
    return s.str();
}

}  // namespace tsnsim
