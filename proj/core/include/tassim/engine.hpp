#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tassim/dataplane.hpp"
#include "tassim/schedule.hpp"
#include "tassim/timing.hpp"
#include "tassim/trace.hpp"
#include "tassim/types.hpp"

namespace tassim {

inline constexpr std::size_t kMaxDistinctPeriods = 15;
inline constexpr std::size_t kDefaultQueueDepth = 4096;

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrafficSource {
  std::uint64_t rate_pps = 0;
  std::uint32_t frame_bytes = 64;
  int priority = -1;          // -1 = uniform random over 0..7 per frame
  bool mpls = false;
  std::uint32_t s_label_base = 0;  // DetNet sources carry s_label_base + priority
  std::uint64_t eth_dst = 0xaabbccdd0000ull;
  Ps start = 0;
  Ps duration = -1;  // -1 = until sim end
};

/// One stream GCL attached to a period: PSFP policing for frames identified
/// to this gate.
struct SgclConfig {
  Gcl gcl;  // kind Stream, gate_id set, period_ns set
};

struct Scenario {
  std::string name = "scenario";
  Gcl tgcl;  // data entries only; GSIs inserted per gsi_ns/gsi_mode below
  Ns gsi_ns = 0;
  GsiMode gsi_mode = GsiMode::ShrinkEntries;
  std::vector<SgclConfig> sgcls;

  DelayModel tg_model = DelayModel::make_constant(0);
  DelayModel queue_model = DelayModel::make_constant(0);
  DelayModel control_model = DelayModel::make_constant(9);
  // Redraw quantum for the queue-delay process: one draw per grid cell of this
  // many nanoseconds (grid offset by half a cell so draws change mid-entry,
  // never between the paired close/open of one boundary). 0 = fresh draw per
  // transition.
  Ns queue_hold_ns = 0;

  std::vector<TrafficSource> sources;
  std::vector<StreamTableEntry> stream_entries;

  std::uint64_t link_bps = 400'000'000'000ull;
  std::size_t queue_depth = kDefaultQueueDepth;
  std::size_t tgcl_capacity = kTgclCapacity;
  std::size_t sgcl_capacity = kSgclCapacity;
  std::size_t stream_capacity = kStreamTableCapacity;
  int key_width = kDefaultKeyWidth;

  std::uint64_t seed = 1;
  Ps sim_duration = 0;
  std::uint32_t record_mask = 0xffffffffu;  // which TraceEventKinds to record
  bool best_effort_on_translate_miss = true;
};

constexpr std::uint32_t record_bit(TraceEventKind k) {
  return 1u << static_cast<std::uint32_t>(k);
}

struct RunStats {
  std::uint64_t frames_generated = 0;
  std::uint64_t frames_transmitted = 0;  // dequeued onto the wire
  std::uint64_t psfp_dropped = 0;
  std::uint64_t tail_dropped = 0;
  std::uint64_t translate_dropped = 0;
  std::uint64_t in_queue_at_end = 0;
  std::uint64_t control_frames = 0;
  std::uint64_t completions = 0;
  std::uint64_t gate_changes = 0;
};

struct RunResult {
  Trace trace;
  RunStats stats;
};

/// Throws (EngineError / ScheduleError / CapacityError / TimingError) if the
/// scenario cannot run: invalid schedules, compiled tables over capacity, more
/// than 15 distinct periods, malformed delay models, no duration.
void validate_scenario(const Scenario& scenario);

/// The tGCL with GSIs inserted, as the run will execute it.
Gcl effective_tgcl(const Scenario& scenario);

/// Executes the scenario, streaming trace events into `sink`. Deterministic:
/// one (scenario, seed) pair yields one event sequence.
RunStats run_with_sink(const Scenario& scenario, TraceSink& sink);

RunResult run_full(const Scenario& scenario);
Trace run(const Scenario& scenario);

/// Enumerates TAS control frame emissions up to `horizon_ns`: consecutive
/// frames separated by draws from the gap model, queue index cycling 0..7.
/// A batch whose eight draws sum to zero advances the clock by 1 ns before
/// the next batch so the generator always makes progress.
std::vector<std::pair<Ns, int>> control_frame_schedule(Ns period_ns, const DelayModel& gap_model,
                                                       Ns horizon_ns, std::uint64_t seed = 1);

}  // namespace tassim
