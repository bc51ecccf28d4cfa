#pragma once

#include <cstdint>

namespace tassim {

// Hardware-visible timestamps are 48-bit unsigned nanoseconds. The simulation
// clock itself runs in integer picoseconds so that serialization times at
// 400 Gb/s (1.68 ns for a minimum frame) stay exact.
using Ns = std::int64_t;   // signed: delay deltas can be negative
using Ps = std::int64_t;
using Timestamp = std::uint64_t;  // nanoseconds, < 2^48

inline constexpr Ps kPsPerNs = 1000;
inline constexpr int kTimestampBits = 48;
inline constexpr int kNumQueues = 8;
inline constexpr std::uint64_t kLinkOverheadBytes = 20;  // preamble + IFG

constexpr Ps ns_to_ps(Ns ns) { return ns * kPsPerNs; }
constexpr Ns ps_to_ns(Ps ps) { return ps / kPsPerNs; }  // truncates, matches hardware view

// Serialization time of one frame on the wire, exact in picoseconds.
constexpr Ps serialization_ps(std::uint64_t frame_bytes, std::uint64_t link_bps) {
  const std::uint64_t bits = (frame_bytes + kLinkOverheadBytes) * 8;
  return static_cast<Ps>(bits * 1'000'000'000'000ull / link_bps);
}

}  // namespace tassim
