#include "tsnsim/tas.hpp"

#include "tsnsim/errors.hpp"

namespace tsnsim {

EgressPort::EgressPort(PortKey key, BitRate rate, std::optional<GateControlList> gcl,
                       bool include_l1_overhead, Bytes queue_capacity)
    : key_(std::move(key)),
      rate_(rate),
      gcl_(std::move(gcl)),
      l1_overhead_(include_l1_overhead),
      capacity_(queue_capacity) {}

Nanos EgressPort::tx_duration(Bytes size) const { return transmission_time(size, rate_, l1_overhead_); }

bool EgressPort::gate_is_open(int queue, Nanos t) const {
    return !gcl_ || is_gate_open(*gcl_, queue, t);
}

GateVector EgressPort::gates_at(Nanos t) const { return gcl_ ? gate_state_at(*gcl_, t) : kAllOpen; }

EnqueueResult EgressPort::enqueue(QueuedFrame frame, int queue) {
    if (queue < 0 || queue >= kNumQueues) throw InternalError("queue index out of range");
    auto& occ = occupancy_[static_cast<std::size_t>(queue)];
    if (capacity_ > 0 && occ + frame.size > capacity_) {
        ++overflow_drops_;
        return EnqueueResult::DroppedOverflow;
    }
    occ += frame.size;
    queues_[static_cast<std::size_t>(queue)].push_back(frame);
    return EnqueueResult::Enqueued;
}

TransmitAttempt EgressPort::try_transmit(Nanos t) {
    TransmitAttempt attempt;
    if (in_flight_ || t < busy_until_) return attempt;

    for (int q = kNumQueues - 1; q >= 0; --q) {
        auto& fifo = queues_[static_cast<std::size_t>(q)];
        if (fifo.empty() || !gate_is_open(q, t)) continue;

        const QueuedFrame head = fifo.front();
        const Nanos duration = tx_duration(head.size);
        // Length-aware guard: only this queue's own next close matters.
        const Nanos close = gcl_ ? next_gate_close(*gcl_, q, t) : kNever;
        if (close != kNever && duration > close - t) {
            attempt.deferred.push_back(head);
            continue;
        }

        fifo.pop_front();
        occupancy_[static_cast<std::size_t>(q)] -= head.size;
        in_flight_ = TxStart{q, head, t, t + duration};
        busy_until_ = t + duration;
        attempt.started = in_flight_;
        return attempt;
    }
    return attempt;
}

TxStart EgressPort::complete(Nanos t) {
    if (!in_flight_) throw InternalError("tx complete on idle port " + key_.name());
    if (t != in_flight_->end) throw InternalError("tx complete at wrong time on port " + key_.name());
    TxStart done = *in_flight_;
    in_flight_.reset();
    return done;
}

}  // namespace tsnsim
