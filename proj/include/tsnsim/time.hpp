#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace tsnsim {

/// All simulated time is integer nanoseconds. There is no floating point
/// anywhere in the kernel.
using Nanos = std::chrono::nanoseconds;

using Bytes = std::int64_t;
using BitRate = std::int64_t;  // bits per second

inline constexpr Nanos kNever = Nanos::max();

/// Ethernet preamble + SFD + inter-frame gap.
inline constexpr Bytes kL1OverheadBytes = 20;

/// Time to serialize `size` bytes onto a link of `rate` bits/s, rounded up
/// to the next nanosecond.
Nanos transmission_time(Bytes size, BitRate rate, bool include_l1_overhead = false);

/// Parses "60us", "10 ms", "250ns", "1s" or a bare integer (nanoseconds).
/// Throws std::invalid_argument on malformed input.
Nanos parse_duration(std::string_view text);

/// Parses "1Gbps", "100Mbps", "8000kbps" or a bare integer (bits/s).
BitRate parse_rate(std::string_view text);

/// Shortest exact rendering: 60000 ns -> "60us", 10000000 -> "10ms".
std::string format_duration(Nanos d);

/// Floor modulo that stays non-negative for negative dividends.
constexpr Nanos positive_mod(Nanos t, Nanos m) {
    auto r = t % m;
    return r < Nanos::zero() ? r + m : r;
}

}  // namespace tsnsim
