#pragma once

#include <map>
#include <string>
#include <vector>

#include "tsnsim/config.hpp"

namespace tsnsim {

struct Diagnostic {
    std::string code;  // short stable tag, e.g. "GCL gap"
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Every invariant violation found in the config; empty means valid.
std::vector<Diagnostic> validate_config(const SimConfig& config);

/// "code: message" lines joined by newlines.
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

struct QueueBacklog {
    std::string port;
    int queue = 0;
    Bytes peak = 0;
    /// Bytes still queued just before each boundary H, 2H, 3H.
    std::vector<Bytes> at_boundary;
};

struct FeasibilityReport {
    bool feasible = false;
    Nanos hyperperiod{0};
    std::map<StreamId, Nanos> max_latency;
    std::vector<QueueBacklog> backlog;
    std::uint64_t slot_misses = 0;  // guard deferrals before 3H, warm-up included
    std::uint64_t drops = 0;
    std::vector<std::string> problems;  // empty when feasible
};

/// Fault-free run: hyperperiod 1 is warm-up, 2 and 3 are measured, and a
/// fourth lets frames in flight at 3H finish. Feasible when nothing is
/// dropped, every stream delivers, and the backlog at H, 2H and 3H repeats
/// (zero for a draining schedule).
/// Throws ConfigError if the config does not validate.
FeasibilityReport check_feasibility(const SimConfig& config);

/// Structured rendering of the report, for the CLI and machine consumers.
std::string feasibility_json(const FeasibilityReport& report);
std::string feasibility_text(const FeasibilityReport& report);

}  // namespace tsnsim
