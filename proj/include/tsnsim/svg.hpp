#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsnsim/trace.hpp"

namespace tsnsim {

struct ChartOptions {
    std::string title;
    /// Visible window; defaults to the extent of the data.
    std::optional<Nanos> from;
    std::optional<Nanos> to;
    /// Vertical markers at every multiple of this interval (period or
    /// hyperperiod).
    std::optional<Nanos> marker_interval;
    int width = 960;
    int height = 360;
};

/// Fill color of a stream, by its rank among the sorted ids of one chart.
std::string stream_color(std::size_t rank);

/// Stacked per-stream occupancy of one queue with the gate band under the
/// x-axis (green = open, red = closed). `layers` are per-stream series of
/// the same port/queue.
std::string render_occupancy_svg(const std::vector<OccupancySeries>& layers,
                                 const std::vector<std::pair<Nanos, bool>>& gate_band, const ChartOptions& options);

/// One polyline per stream: latency over emission time; drops as crosses
/// on the x-axis.
std::string render_latency_svg(const std::map<StreamId, std::vector<LatencySample>>& series,
                               const ChartOptions& options);

}  // namespace tsnsim
