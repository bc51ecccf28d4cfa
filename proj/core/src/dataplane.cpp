#include "tassim/dataplane.hpp"

#include <algorithm>

namespace tassim {

void StreamTable::add(const StreamTableEntry& entry) {
  if (entries_.size() >= capacity_)
    throw CapacityError("stream", entries_.size() + 1 - capacity_);
  entries_.push_back(entry);
}

namespace {

bool key_matches(const StreamKey& key, const Frame& f) {
  if (key.s_label != kWildcard) {
    if (!f.mpls || f.mpls->s_label != key.s_label) return false;
  }
  if (key.eth_dst != ~0ull && key.eth_dst != f.eth_dst) return false;
  if (key.vlan_id != kWildcard) {
    if (!f.vlan || f.vlan->id != key.vlan_id) return false;
  }
  // IPv4 fields are carried for wildcard aggregation; the simulated frames do
  // not populate them, so only exact-wildcard entries can match here.
  return true;
}

}  // namespace

const StreamTableEntry* StreamTable::lookup(const Frame& frame, StreamActionKind kind) const {
  for (const StreamTableEntry& e : entries_) {
    if (e.action.kind != kind) continue;
    if (key_matches(e.key, frame)) return &e;
  }
  return nullptr;
}

EnqueueResult EgressPort::enqueue(const QueuedFrame& frame) {
  auto& q = queues_[frame.priority];
  if (q.size() >= queue_depth_) return EnqueueResult::QueueFull;
  q.push_back(frame);
  return EnqueueResult::Ok;
}

void EgressPort::schedule_change(const GateChange& change) {
  auto it = std::upper_bound(pending_.begin(), pending_.end(), change,
                             [](const GateChange& a, const GateChange& b) {
                               return a.effective_time < b.effective_time;
                             });
  pending_.insert(it, change);
}

void EgressPort::apply_pending(Ps now) {
  std::size_t applied = 0;
  for (const GateChange& c : pending_) {
    if (c.effective_time > now) break;
    if (c.open)
      gate_mask_ |= static_cast<std::uint8_t>(1u << c.queue);
    else
      gate_mask_ &= static_cast<std::uint8_t>(~(1u << c.queue));
    ++applied;
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(applied));
}

std::optional<Ps> EgressPort::next_pending_after(Ps now) const {
  for (const GateChange& c : pending_)
    if (c.effective_time > now) return c.effective_time;
  return std::nullopt;
}

std::size_t EgressPort::total_queued() const {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

std::optional<Transmission> EgressPort::transmit_step(Ps now) {
  apply_pending(now);
  if (now < busy_until_) return std::nullopt;
  for (int q = kNumQueues - 1; q >= 0; --q) {
    if (!gate_open(q)) continue;
    auto& queue = queues_[static_cast<std::size_t>(q)];
    if (queue.empty()) continue;
    Transmission tx;
    tx.frame = queue.front();
    queue.pop_front();
    tx.queue = static_cast<std::uint8_t>(q);
    tx.t_deq = now;
    tx.t_done = now + serialization_ps(tx.frame.size, link_bps_);
    busy_until_ = tx.t_done;
    return tx;
  }
  return std::nullopt;
}

TranslateResult translate_detnet_to_tsn(const Frame& frame, const StreamTable& table,
                                        bool best_effort_on_miss) {
  TranslateResult r{frame, false, false};
  if (!frame.mpls) return r;  // not a DetNet frame
  const StreamTableEntry* e = table.lookup(frame, StreamActionKind::Translate);
  if (!e) {
    if (best_effort_on_miss)
      r.frame.priority = 0;
    else
      r.dropped = true;
    return r;
  }
  r.matched = true;
  r.frame.vlan = Vlan{e->action.vlan_id, e->action.priority};
  r.frame.priority = e->action.priority;
  return r;
}

Frame translate_tsn_to_detnet(const Frame& frame) {
  Frame out = frame;
  out.vlan.reset();
  return out;
}

Frame identify_stream(const Frame& frame, const StreamTable& table) {
  Frame out = frame;
  const StreamTableEntry* e = table.lookup(frame, StreamActionKind::Identify);
  if (e) {
    out.stream = e->action.stream_handle;
    out.sgcl_id = e->action.sgcl_id;
    out.priority = e->action.priority;
  } else {
    out.stream.reset();
    out.sgcl_id = kWildcard;
    out.priority = frame.vlan ? frame.vlan->pcp : frame.priority;
  }
  return out;
}

PsfpDecision psfp_gate(const Frame& frame, const Gcl& sgcl, Ns rel_ns) {
  (void)frame;
  const auto [index, entry] = entry_at(sgcl, rel_ns);
  (void)index;
  return entry->stream_open ? PsfpDecision::Pass : PsfpDecision::Drop;
}

std::optional<GateChange> apply_afc(const Frame& ctrl, const MatTable& tgcl_mat, Ns rel_ns,
                                    Ps now, const std::function<Ns()>& sample_queue_delay,
                                    AfcState& state) {
  if (ctrl.kind != FrameKind::TasControl || !ctrl.control_meta) return std::nullopt;
  const ControlMeta& meta = *ctrl.control_meta;
  TernaryKey key;
  key.timestamp = static_cast<std::uint64_t>(rel_ns);
  key.port = meta.target_port;
  key.queue = meta.target_queue;
  const auto row = tgcl_mat.match(key);
  if (!row) return std::nullopt;
  const bool open = row->action == TernaryAction::Open;
  std::int8_t& commanded = state.commanded[meta.target_queue];
  if (commanded == (open ? 1 : 0)) return std::nullopt;  // re-assertion
  commanded = open ? 1 : 0;
  GateChange change;
  change.effective_time = now + ns_to_ps(sample_queue_delay());
  change.port = meta.target_port;
  change.queue = meta.target_queue;
  change.open = open;
  return change;
}

}  // namespace tassim
