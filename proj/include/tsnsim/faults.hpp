#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsnsim/model.hpp"

namespace tsnsim {

enum class FaultKind { DropFrame, InjectFrame, ShiftFrame, ShiftStream };

const char* to_string(FaultKind k);
FaultKind fault_kind_from_string(const std::string& s);

struct InjectSpec {
    Nanos time{0};
    Bytes size = 0;
    int priority = 7;

    friend bool operator==(const InjectSpec&, const InjectSpec&) = default;
};

/// One timed perturbation of a talker's emissions. Single-frame actions
/// (DropFrame, ShiftFrame) address the frame by `seq`, or by `near`: the
/// frame whose unperturbed emission time is closest to that instant.
struct FaultAction {
    FaultKind kind = FaultKind::ShiftFrame;
    StreamId stream_id;
    std::optional<std::uint64_t> seq;
    std::optional<Nanos> near;
    Nanos shift{0};  // negative = early
    InjectSpec inject;
    std::uint64_t from_seq = 0;

    friend bool operator==(const FaultAction&, const FaultAction&) = default;
};

struct FaultScenario {
    std::vector<FaultAction> actions;

    bool empty() const { return actions.empty(); }
    friend bool operator==(const FaultScenario&, const FaultScenario&) = default;
};

struct Emission {
    Nanos time{0};
    Frame frame;

    friend bool operator==(const Emission&, const Emission&) = default;
};

/// Stream id under which frames injected on behalf of `stream` are traced.
std::string synthetic_stream_id(const StreamId& stream);

/// Applies every action to a time-sorted emission list and returns the
/// re-sorted result. `streams` lists the configured streams for existence
/// checks; when empty, the streams present in `emissions` are used.
/// Throws ConfigError when an action names an unknown stream or frame.
std::vector<Emission> apply(const FaultScenario& scenario, std::vector<Emission> emissions,
                            std::span<const StreamSpec> streams = {});

/// Resolves `near` selectors into concrete sequence numbers.
FaultScenario resolve_targets(const FaultScenario& scenario, std::span<const StreamSpec> streams);

}  // namespace tsnsim
