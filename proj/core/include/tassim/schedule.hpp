#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tassim/types.hpp"

namespace tassim {

/// Open/closed state of the eight transmission gates of one egress port.
struct GateVector {
  std::array<bool, kNumQueues> gates{};  // true = open

  static GateVector all_closed() { return GateVector{}; }
  static GateVector all_open() {
    GateVector v;
    v.gates.fill(true);
    return v;
  }
  static GateVector only(int queue) {
    GateVector v;
    v.gates[static_cast<std::size_t>(queue)] = true;
    return v;
  }

  bool open(int queue) const { return gates[static_cast<std::size_t>(queue)]; }
  void set(int queue, bool state) { gates[static_cast<std::size_t>(queue)] = state; }

  std::uint8_t mask() const {
    std::uint8_t m = 0;
    for (int q = 0; q < kNumQueues; ++q)
      if (gates[static_cast<std::size_t>(q)]) m |= static_cast<std::uint8_t>(1u << q);
    return m;
  }

  bool operator==(const GateVector&) const = default;
};

enum class GclKind { Transmission, Stream };

/// One time slice. Transmission entries carry a full gate vector, stream
/// entries a single open/closed state; GSIs are all-closed transmission
/// entries inserted between schedule entries.
struct GclEntry {
  Ns duration_ns = 0;
  GateVector gates;        // transmission kind
  bool stream_open = false;  // stream kind
  bool is_gsi = false;

  bool operator==(const GclEntry&) const = default;
};

struct Gcl {
  GclKind kind = GclKind::Transmission;
  std::vector<GclEntry> entries;
  Ns period_ns = 0;
  std::uint32_t gate_id = 0;  // stream kind
  std::uint32_t port = 0;     // transmission kind

  bool operator==(const Gcl&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

enum class GsiMode { ExtendPeriod, ShrinkEntries };

struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Checks the structural invariants: non-empty entry list, no zero-duration
/// entry, period equal to the sum of durations, GSI flags consistent.
ValidationReport validate_gcl(const Gcl& gcl);

/// Inserts an all-closed GSI entry after every entry, including the last, so
/// the cycle wraparound is guarded too. ShrinkEntries keeps the period and
/// subtracts the GSI duration from each original entry; ExtendPeriod keeps the
/// entries and grows the period. gsi_ns == 0 returns the input unchanged.
/// Throws ScheduleError if ShrinkEntries would leave a non-positive entry.
Gcl insert_gsis(const Gcl& gcl, Ns gsi_ns, GsiMode mode);

/// Removes GSI entries and, for ShrinkEntries, restores the original
/// durations. Inverse of insert_gsis for round-trip checks.
Gcl strip_gsis(const Gcl& gcl, Ns gsi_ns, GsiMode mode);

/// Entry whose half-open interval [start, start+duration) contains rel_ns.
/// rel_ns >= period clamps to the final entry, mirroring the behavior of the
/// relative-timestamp pipeline when a period-completion frame arrives late.
std::pair<std::size_t, const GclEntry*> entry_at(const Gcl& gcl, Ns rel_ns);

/// Start offset of entry `index` within the cycle.
Ns entry_start(const Gcl& gcl, std::size_t index);

/// Convenience builder: one transmission entry per queue 0..7, each of
/// duration `entry_ns`, opening only that queue.
Gcl make_round_robin_tgcl(Ns entry_ns, std::uint32_t port = 0, int num_entries = kNumQueues);

}  // namespace tassim
