#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tassim/schedule.hpp"
#include "tassim/tcam.hpp"
#include "tassim/timing.hpp"
#include "tassim/types.hpp"

namespace tassim {

enum class FrameKind : std::uint8_t { Data, PeriodCompletion, TasControl };

struct Vlan {
  std::uint16_t id = 0;   // 0..4095
  std::uint8_t pcp = 0;   // 0..7
  bool operator==(const Vlan&) const = default;
};

struct Mpls {
  std::vector<std::uint32_t> f_labels;
  std::uint32_t s_label = 0;   // 20-bit service label
  std::uint32_t dcw_seq = 0;   // carried, not acted on
  bool operator==(const Mpls&) const = default;
};

struct ControlMeta {
  std::uint32_t target_port = 0;
  std::uint8_t target_queue = 0;
};

struct Frame {
  FrameKind kind = FrameKind::Data;
  Ps t_gen = 0;
  Ps t_ingress = 0;
  std::uint32_t size = 64;  // bytes, >= 64
  std::uint8_t priority = 0;
  std::uint64_t eth_dst = 0;
  std::optional<Vlan> vlan;
  std::optional<Mpls> mpls;
  std::optional<ControlMeta> control_meta;
  std::optional<std::uint32_t> stream;   // assigned at identification
  std::uint32_t sgcl_id = kWildcard;     // stream gate, if identified
  std::uint64_t id = 0;

  Timestamp ingress_ns() const { return static_cast<Timestamp>(ps_to_ns(t_ingress)); }
};

// ---- Stream identification / DetNet translation -------------------------

struct StreamKey {
  // Wildcard fields use kWildcard (or ~0ull for the MAC).
  std::uint32_t s_label = kWildcard;
  std::uint64_t eth_dst = ~0ull;
  std::uint32_t vlan_id = kWildcard;
  std::uint32_t ipv4_src = kWildcard;
  std::uint32_t ipv4_dst = kWildcard;
};

enum class StreamActionKind : std::uint8_t { Translate, Identify };

struct StreamAction {
  StreamActionKind kind = StreamActionKind::Identify;
  // Translate: push this VLAN with this priority.
  std::uint16_t vlan_id = 0;
  std::uint8_t priority = 0;
  // Identify: attach this handle and stream gate.
  std::uint32_t stream_handle = 0;
  std::uint32_t sgcl_id = kWildcard;
};

struct StreamTableEntry {
  StreamKey key;
  StreamAction action;
};

class StreamTable {
 public:
  explicit StreamTable(std::size_t capacity = kStreamTableCapacity) : capacity_(capacity) {}

  void add(const StreamTableEntry& entry);
  const StreamTableEntry* lookup(const Frame& frame, StreamActionKind kind) const;
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::vector<StreamTableEntry> entries_;  // first-match by insertion order
};

// ---- Egress port ---------------------------------------------------------

struct GateChange {
  Ps effective_time = 0;
  std::uint32_t port = 0;
  std::uint8_t queue = 0;
  bool open = false;
};

struct QueuedFrame {
  Ps t_gen = 0;
  std::uint64_t id = 0;
  std::uint32_t size = 64;
  std::uint8_t priority = 0;
  std::uint32_t stream = kWildcard;
};

enum class EnqueueResult : std::uint8_t { Ok, QueueFull };

struct Transmission {
  QueuedFrame frame;
  Ps t_deq = 0;
  Ps t_done = 0;
  std::uint8_t queue = 0;
};

class EgressPort {
 public:
  EgressPort(std::uint32_t port_id, std::uint64_t link_bps, std::size_t queue_depth)
      : port_id_(port_id), link_bps_(link_bps), queue_depth_(queue_depth) {}

  std::uint32_t id() const { return port_id_; }
  std::uint64_t link_bps() const { return link_bps_; }

  EnqueueResult enqueue(const QueuedFrame& frame);

  /// Applies pending gate changes effective at or before `now`, then starts
  /// the highest-priority open non-empty queue if the link is idle (strict
  /// priority across open gates, FIFO within a queue).
  std::optional<Transmission> transmit_step(Ps now);

  void schedule_change(const GateChange& change);
  void apply_pending(Ps now);

  bool gate_open(int queue) const { return (gate_mask_ & (1u << queue)) != 0; }
  std::uint8_t gate_mask() const { return gate_mask_; }
  void set_gate_mask(std::uint8_t mask) { gate_mask_ = mask; }
  std::size_t queue_depth(int queue) const { return queues_[static_cast<std::size_t>(queue)].size(); }
  std::size_t total_queued() const;
  Ps busy_until() const { return busy_until_; }

  /// Earliest pending change later than `now`, if any (the engine turns these
  /// into events).
  std::optional<Ps> next_pending_after(Ps now) const;

 private:
  std::uint32_t port_id_;
  std::uint64_t link_bps_;
  std::size_t queue_depth_;
  std::array<std::deque<QueuedFrame>, kNumQueues> queues_;
  std::uint8_t gate_mask_ = 0;  // bit q set = gate open
  std::vector<GateChange> pending_;  // kept sorted by effective_time
  Ps busy_until_ = 0;
};

// ---- Pipeline operations -------------------------------------------------

/// DetNet ingress: on an S-Label match, pushes the mapped VLAN (pcp = mapped
/// priority) on top of the retained MPLS stack. Misses fall back to
/// best-effort priority 0 (or drop when best_effort_on_miss is false).
/// Frames without MPLS pass through untouched.
struct TranslateResult {
  Frame frame;
  bool matched = false;
  bool dropped = false;
};
TranslateResult translate_detnet_to_tsn(const Frame& frame, const StreamTable& table,
                                        bool best_effort_on_miss = true);

/// DetNet egress: removes the VLAN pushed at ingress; everything else is
/// untouched. No-op without a VLAN.
Frame translate_tsn_to_detnet(const Frame& frame);

/// TSN stream identification on (dst MAC, VLAN) or S-Label wildcard entries.
/// A miss leaves the frame best-effort: priority from the VLAN pcp or 0.
Frame identify_stream(const Frame& frame, const StreamTable& table);

enum class PsfpDecision : std::uint8_t { Pass, Drop };

/// Time-based ingress policing: pass iff the stream gate is open at rel_ns.
/// Drops happen before any queue is touched.
PsfpDecision psfp_gate(const Frame& frame, const Gcl& sgcl, Ns rel_ns);

/// Applies a TAS control frame to the compiled tGCL table. On a match the
/// commanded state is compared to the last command for that queue: only real
/// transitions produce a GateChange (re-asserting the current state has no
/// observable effect and would burn scripted delay samples, which is why the
/// delay is a callback, drawn only when a transition actually happens). The
/// change takes effect at now + queue-delay sample.
struct AfcState {
  // last commanded state per (port, queue); engine owns one per port
  std::array<std::int8_t, kNumQueues> commanded{};  // -1 unknown, 0 closed, 1 open
  AfcState() { commanded.fill(-1); }
};

std::optional<GateChange> apply_afc(const Frame& ctrl, const MatTable& tgcl_mat, Ns rel_ns,
                                    Ps now, const std::function<Ns()>& sample_queue_delay,
                                    AfcState& state);

}  // namespace tassim
