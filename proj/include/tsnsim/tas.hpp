#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "tsnsim/config.hpp"
#include "tsnsim/model.hpp"

namespace tsnsim {

/// Reference to a frame owned by the simulation kernel, with its size.
struct QueuedFrame {
    std::uint32_t handle = 0;
    Bytes size = 0;

    friend bool operator==(const QueuedFrame&, const QueuedFrame&) = default;
};

enum class EnqueueResult { Enqueued, DroppedOverflow };

struct TxStart {
    int queue = 0;
    QueuedFrame frame;
    Nanos start{0};
    Nanos end{0};
};

struct TransmitAttempt {
    std::optional<TxStart> started;
    /// Heads of open queues that were held back because they would not
    /// finish before their gate closes.
    std::vector<QueuedFrame> deferred;
};

/// One egress port: eight strict-priority FIFO queues behind transmission
/// gates. A port without a GCL has every gate permanently open.
class EgressPort {
public:
    EgressPort(PortKey key, BitRate rate, std::optional<GateControlList> gcl,
               bool include_l1_overhead = false, Bytes queue_capacity = 0);

    const PortKey& key() const { return key_; }
    BitRate rate() const { return rate_; }
    bool gated() const { return gcl_.has_value(); }
    const std::optional<GateControlList>& gcl() const { return gcl_; }

    Nanos tx_duration(Bytes size) const;
    bool gate_is_open(int queue, Nanos t) const;
    GateVector gates_at(Nanos t) const;

    /// Appends to queues[queue]; drops when the queue's byte occupancy would
    /// exceed the configured capacity.
    EnqueueResult enqueue(QueuedFrame frame, int queue);

    /// Starts a transmission if the port is idle and some queue is non-empty,
    /// open at t, and its head frame completes before that gate closes.
    /// The highest such queue wins.
    TransmitAttempt try_transmit(Nanos t);

    /// Ends the current transmission; returns the frame that was on the wire.
    TxStart complete(Nanos t);

    bool transmitting() const { return in_flight_.has_value(); }
    const std::optional<TxStart>& in_flight() const { return in_flight_; }
    Nanos busy_until() const { return busy_until_; }

    Bytes occupancy(int queue) const { return occupancy_[static_cast<std::size_t>(queue)]; }
    std::size_t depth(int queue) const { return queues_[static_cast<std::size_t>(queue)].size(); }
    const std::deque<QueuedFrame>& queue(int q) const { return queues_[static_cast<std::size_t>(q)]; }

    std::uint64_t overflow_drops() const { return overflow_drops_; }

private:
    PortKey key_;
    BitRate rate_;
    std::optional<GateControlList> gcl_;
    bool l1_overhead_;
    Bytes capacity_;

    std::array<std::deque<QueuedFrame>, kNumQueues> queues_;
    std::array<Bytes, kNumQueues> occupancy_{};
    std::optional<TxStart> in_flight_;
    Nanos busy_until_{0};
    std::uint64_t overflow_drops_ = 0;
};

}  // namespace tsnsim
