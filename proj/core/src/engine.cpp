#include "tassim/engine.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <set>

#include "tassim/tcam.hpp"

namespace tassim {

namespace {

// Equal-time processing order: completion frames first (their register write
// precedes any same-instant read), then control frames, then gate updates,
// then data arrivals, then transmit completions.
enum class EvKind : std::uint8_t {
  Completion = 0,
  CtrlArrival = 1,
  GateEffective = 2,
  DataArrival = 3,
  TxComplete = 4,
};

struct Ev {
  Ps time = 0;
  EvKind kind = EvKind::Completion;
  std::uint64_t seq = 0;
  std::uint32_t a = 0;   // generator / queue / source / port index
  std::uint64_t b = 0;   // spare payload
};

struct EvLater {
  bool operator()(const Ev& x, const Ev& y) const {
    if (x.time != y.time) return x.time > y.time;
    if (x.kind != y.kind) return x.kind > y.kind;
    return x.seq > y.seq;
  }
};

// Shared emission logic for the continuous TAS control stream: one frame per
// queue, queues cycling 0..7, consecutive frames separated by gap draws.
struct ControlGen {
  DelaySampler gaps;
  Rng rng;
  Ns next_ns = 0;
  int queue = 0;
  Ns batch_start_ns = 0;

  ControlGen(const DelayModel& model, Rng r) : gaps(model), rng(r) {}

  std::pair<Ns, int> emit() {
    const std::pair<Ns, int> out{next_ns, queue};
    next_ns += gaps.sample(rng);
    queue = (queue + 1) % kNumQueues;
    if (queue == 0) {
      if (next_ns == batch_start_ns) next_ns += 1;  // zero-gap batch guard
      batch_start_ns = next_ns;
    }
    return out;
  }
};

// One draw per half-offset grid cell of `quantum_ns`; draws are requested only
// when a gate actually transitions, so scripted sequences advance exactly one
// step per transition when quantum is 0.
struct HeldQueueDelay {
  Ns quantum = 0;
  DelaySampler sampler;
  Rng rng;
  std::int64_t key = std::numeric_limits<std::int64_t>::min();
  Ns value = 0;

  HeldQueueDelay(Ns quantum_ns, const DelayModel& model, Rng r)
      : quantum(quantum_ns), sampler(model), rng(r) {}

  Ns get(Ns write_time_ns) {
    if (quantum <= 0) return sampler.sample(rng);
    const std::int64_t k = (write_time_ns + quantum / 2) / quantum;
    if (k != key) {
      key = k;
      value = sampler.sample(rng);
    }
    return value;
  }
};

struct PeriodGen {
  Ns period_ns = 0;
  PeriodReference ref;  // last_completion starts at 0
  DelaySampler tg;
  Rng rng;
  std::uint64_t count = 0;

  PeriodGen(Ns period, const DelayModel& model, Rng r) : period_ns(period), tg(model), rng(r) {
    ref.period_ns = period;
  }
};

struct SgclRuntime {
  Gcl gcl;
  std::vector<Ns> starts;  // prefix sums
  std::vector<bool> open;
  std::size_t period_gen = 0;

  bool open_at(Ns rel) const {
    // final entry absorbs rel >= period (clamping)
    std::size_t lo = 0, hi = starts.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (starts[mid] <= rel) lo = mid + 1; else hi = mid;
    }
    const std::size_t idx = lo == 0 ? 0 : std::min(lo - 1, open.size() - 1);
    return open[idx];
  }
};

struct Resolved {
  bool drop = false;          // translation-miss drop policy
  std::uint8_t priority = 0;
  std::uint32_t stream = kWildcard;
  int sgcl = -1;  // index into sgcl runtimes, -1 = best effort (no PSFP)
};

struct SourceState {
  const TrafficSource* cfg = nullptr;
  Ps next = 0;
  std::uint64_t acc = 0;  // residue numerator for exact inter-arrival
  Rng rng;
  std::array<Resolved, kNumQueues> memo;
  std::array<bool, kNumQueues> memo_set{};
};

}  // namespace

Gcl effective_tgcl(const Scenario& s) {
  return s.gsi_ns > 0 ? insert_gsis(s.tgcl, s.gsi_ns, s.gsi_mode) : s.tgcl;
}

void validate_scenario(const Scenario& s) {
  if (s.sim_duration <= 0) throw EngineError("sim duration must be positive");
  if (s.link_bps == 0) throw EngineError("link rate must be positive");
  if (s.queue_depth == 0) throw EngineError("queue depth must be positive");

  const Gcl tgcl = effective_tgcl(s);
  const ValidationReport tr = validate_gcl(tgcl);
  if (!tr.valid()) throw EngineError("tGCL invalid: " + tr.violations.front());

  std::set<Ns> periods{tgcl.period_ns};
  for (const SgclConfig& sc : s.sgcls) {
    if (sc.gcl.kind != GclKind::Stream) throw EngineError("sGCL config with non-stream kind");
    const ValidationReport r = validate_gcl(sc.gcl);
    if (!r.valid())
      throw EngineError("sGCL " + std::to_string(sc.gcl.gate_id) + " invalid: " + r.violations.front());
    periods.insert(sc.gcl.period_ns);
  }
  if (periods.size() > kMaxDistinctPeriods)
    throw EngineError("more than " + std::to_string(kMaxDistinctPeriods) +
                      " distinct GCL periods configured");

  validate_model(s.tg_model);
  validate_model(s.queue_model);
  validate_model(s.control_model);
  // generator deviation is signed; queue and control delays are not
  for (const DelayModel* m : {&s.queue_model, &s.control_model}) {
    bool negative = false;
    switch (m->kind) {
      case DelayKind::Constant: negative = m->constant < 0; break;
      case DelayKind::Uniform: negative = m->lo < 0; break;
      case DelayKind::Empirical:
        for (const auto& [v, p] : m->points) negative |= v < 0 && p > 0;
        break;
      case DelayKind::Scripted:
        for (const Ns v : m->sequence) negative |= v < 0;
        break;
    }
    if (negative)
      throw EngineError(std::string(m == &s.queue_model ? "queue" : "control") +
                        " delay model produces negative values");
  }

  // Capacity pre-check by compiling the tables.
  compile_tgcl(tgcl, s.key_width, s.tgcl_capacity);
  for (const SgclConfig& sc : s.sgcls) compile_sgcl(sc.gcl, s.key_width, s.sgcl_capacity);

  StreamTable table(s.stream_capacity);
  for (const StreamTableEntry& e : s.stream_entries) table.add(e);

  for (const TrafficSource& src : s.sources) {
    if (src.rate_pps == 0) throw EngineError("traffic source with zero rate");
    if (src.frame_bytes < 64) throw EngineError("frame size below 64 bytes");
    if (src.priority < -1 || src.priority > 7) throw EngineError("source priority out of range");
  }
  for (const StreamTableEntry& e : s.stream_entries) {
    if (e.action.kind == StreamActionKind::Identify && e.action.sgcl_id != kWildcard) {
      const bool known = std::any_of(s.sgcls.begin(), s.sgcls.end(), [&](const SgclConfig& sc) {
        return sc.gcl.gate_id == e.action.sgcl_id;
      });
      if (!known)
        throw EngineError("stream entry references unknown sGCL " + std::to_string(e.action.sgcl_id));
    }
  }
}

RunStats run_with_sink(const Scenario& s, TraceSink& sink) {
  validate_scenario(s);

  const Gcl tgcl = effective_tgcl(s);
  MatTable tgcl_mat = compile_tgcl(tgcl, s.key_width, s.tgcl_capacity);
  const Ns period = tgcl.period_ns;

  StreamTable stream_table(s.stream_capacity);
  for (const StreamTableEntry& e : s.stream_entries) stream_table.add(e);

  Rng master(s.seed);

  // Period generators: index 0 is always the tGCL period.
  std::vector<PeriodGen> gens;
  std::vector<Ns> gen_periods{period};
  for (const SgclConfig& sc : s.sgcls)
    if (std::find(gen_periods.begin(), gen_periods.end(), sc.gcl.period_ns) == gen_periods.end())
      gen_periods.push_back(sc.gcl.period_ns);
  gens.reserve(gen_periods.size());
  for (std::size_t i = 0; i < gen_periods.size(); ++i)
    gens.emplace_back(gen_periods[i], s.tg_model, master.fork(100 + i));

  ControlGen control(s.control_model, master.fork(200));
  HeldQueueDelay queue_delay(s.queue_hold_ns, s.queue_model, master.fork(300));

  std::vector<SgclRuntime> sgcls;
  for (const SgclConfig& sc : s.sgcls) {
    SgclRuntime rt;
    rt.gcl = sc.gcl;
    Ns start = 0;
    for (const GclEntry& e : sc.gcl.entries) {
      rt.starts.push_back(start);
      rt.open.push_back(e.stream_open);
      start += e.duration_ns;
    }
    rt.period_gen = static_cast<std::size_t>(
        std::find(gen_periods.begin(), gen_periods.end(), sc.gcl.period_ns) - gen_periods.begin());
    sgcls.push_back(std::move(rt));
  }

  std::vector<SourceState> sources;
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    SourceState st;
    st.cfg = &s.sources[i];
    st.next = s.sources[i].start;
    st.rng = master.fork(400 + i);
    sources.push_back(std::move(st));
  }

  EgressPort port(tgcl.port, s.link_bps, s.queue_depth);
  AfcState afc;
  std::optional<Transmission> in_flight;

  RunStats stats;
  std::uint64_t frame_counter = 0;
  std::uint64_t ctrl_counter = 0;
  std::uint64_t seq = 0;
  const Ps end = s.sim_duration;

  std::priority_queue<Ev, std::vector<Ev>, EvLater> heap;
  auto push = [&](Ps t, EvKind k, std::uint32_t a, std::uint64_t b = 0) {
    heap.push(Ev{t, k, seq++, a, b});
  };

  const std::uint32_t mask = s.record_mask;
  auto record = [&](TraceEventKind k, Ps t, std::int16_t queue, std::int16_t prio,
                    std::int64_t stream, std::int64_t frame, std::int64_t aux) {
    if ((mask & record_bit(k)) == 0) return;
    TraceEvent e;
    e.time = t;
    e.kind = k;
    e.port = tgcl.port;
    e.queue = queue;
    e.priority = prio;
    e.stream = stream;
    e.frame_id = frame;
    e.aux = aux;
    sink.on_event(e);
  };

  auto try_start = [&](Ps now) {
    if (in_flight) return;
    auto tx = port.transmit_step(now);
    if (!tx) return;
    ++stats.frames_transmitted;
    record(TraceEventKind::Dequeue, tx->t_deq, tx->queue, tx->frame.priority,
           tx->frame.stream == kWildcard ? -1 : tx->frame.stream,
           static_cast<std::int64_t>(tx->frame.id), tx->frame.t_gen);
    in_flight = tx;
    push(tx->t_done, EvKind::TxComplete, 0);
  };

  // Seed the generators.
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const Ns first = gens[g].period_ns + gens[g].tg.sample(gens[g].rng);
    push(ns_to_ps(first), EvKind::Completion, static_cast<std::uint32_t>(g));
  }
  {
    const auto [t, q] = control.emit();
    push(ns_to_ps(t), EvKind::CtrlArrival, static_cast<std::uint32_t>(q));
  }
  for (std::size_t i = 0; i < sources.size(); ++i)
    if (sources[i].next < end) push(sources[i].next, EvKind::DataArrival, static_cast<std::uint32_t>(i));

  Ns pending_write_ns = 0;
  const std::function<Ns()> draw_queue_delay = [&]() {
    return queue_delay.get(pending_write_ns);
  };

  while (!heap.empty()) {
    const Ev ev = heap.top();
    if (ev.time >= end) break;
    heap.pop();
    const Ps now = ev.time;

    switch (ev.kind) {
      case EvKind::Completion: {
        PeriodGen& g = gens[ev.a];
        g.ref.last_completion = static_cast<Timestamp>(ps_to_ns(now));
        ++g.count;
        ++stats.completions;
        record(TraceEventKind::Completion, now, -1, -1, static_cast<std::int64_t>(ev.a),
               static_cast<std::int64_t>(g.count), g.period_ns);
        const Ns next = static_cast<Ns>(ps_to_ns(now)) + g.period_ns + g.tg.sample(g.rng);
        push(ns_to_ps(next), EvKind::Completion, ev.a);
        break;
      }
      case EvKind::CtrlArrival: {
        ++stats.control_frames;
        ++ctrl_counter;
        const int q = static_cast<int>(ev.a);
        record(TraceEventKind::Ctrl, now, static_cast<std::int16_t>(q), -1, -1,
               static_cast<std::int64_t>(ctrl_counter), 0);

        Frame ctrl;
        ctrl.kind = FrameKind::TasControl;
        ctrl.t_ingress = now;
        ctrl.control_meta = ControlMeta{tgcl.port, static_cast<std::uint8_t>(q)};
        const Ns rel = relative_timestamp(ctrl.ingress_ns(), gens[0].ref);
        const Ns rel_clamped = std::min(rel, period - 1);
        pending_write_ns = static_cast<Ns>(ps_to_ns(now));
        const auto change = apply_afc(ctrl, tgcl_mat, rel_clamped, now, draw_queue_delay, afc);
        if (change) {
          ++stats.gate_changes;
          record(TraceEventKind::GateWrite, now, static_cast<std::int16_t>(q), -1, -1, -1,
                 change->open ? 1 : 0);
          port.schedule_change(*change);
          push(change->effective_time, EvKind::GateEffective, change->queue,
               change->open ? 1 : 0);
        }
        // control frame dropped; next one scheduled
        const auto [t, nq] = control.emit();
        push(ns_to_ps(t), EvKind::CtrlArrival, static_cast<std::uint32_t>(nq));
        break;
      }
      case EvKind::GateEffective: {
        port.apply_pending(now);
        record(TraceEventKind::GateEffective, now, static_cast<std::int16_t>(ev.a), -1, -1, -1,
               static_cast<std::int64_t>(ev.b));
        try_start(now);
        break;
      }
      case EvKind::DataArrival: {
        SourceState& src = sources[ev.a];
        const TrafficSource& cfg = *src.cfg;
        ++stats.frames_generated;
        const std::uint64_t id = ++frame_counter;
        const int prio = cfg.priority >= 0 ? cfg.priority
                                           : static_cast<int>(src.rng.bounded(kNumQueues));

        if (!src.memo_set[static_cast<std::size_t>(prio)]) {
          Frame f;
          f.kind = FrameKind::Data;
          f.priority = static_cast<std::uint8_t>(prio);
          f.eth_dst = cfg.eth_dst;
          f.size = cfg.frame_bytes;
          if (cfg.mpls) f.mpls = Mpls{{}, cfg.s_label_base + static_cast<std::uint32_t>(prio), 0};
          const TranslateResult tr =
              translate_detnet_to_tsn(f, stream_table, s.best_effort_on_translate_miss);
          Resolved r;
          if (tr.dropped) {
            r.drop = true;
          } else {
            const Frame idf = identify_stream(tr.frame, stream_table);
            r.priority = idf.priority;
            r.stream = idf.stream ? *idf.stream : kWildcard;
            if (idf.sgcl_id != kWildcard) {
              for (std::size_t k = 0; k < sgcls.size(); ++k)
                if (sgcls[k].gcl.gate_id == idf.sgcl_id) r.sgcl = static_cast<int>(k);
            }
          }
          src.memo[static_cast<std::size_t>(prio)] = r;
          src.memo_set[static_cast<std::size_t>(prio)] = true;
        }
        const Resolved& r = src.memo[static_cast<std::size_t>(prio)];

        const std::int64_t stream_col = r.stream == kWildcard ? -1 : r.stream;
        if (r.drop) {
          ++stats.translate_dropped;
          record(TraceEventKind::PsfpDrop, now, -1, static_cast<std::int16_t>(prio), stream_col,
                 static_cast<std::int64_t>(id), 1);
        } else {
          bool admitted = true;
          if (r.sgcl >= 0) {
            const SgclRuntime& rt = sgcls[static_cast<std::size_t>(r.sgcl)];
            const Ns rel = relative_timestamp(static_cast<Timestamp>(ps_to_ns(now)),
                                              gens[rt.period_gen].ref);
            admitted = rt.open_at(rel);
          }
          record(TraceEventKind::Arrival, now, static_cast<std::int16_t>(r.priority),
                 static_cast<std::int16_t>(r.priority), stream_col,
                 static_cast<std::int64_t>(id), 0);
          if (!admitted) {
            ++stats.psfp_dropped;
            record(TraceEventKind::PsfpDrop, now, static_cast<std::int16_t>(r.priority),
                   static_cast<std::int16_t>(r.priority), stream_col,
                   static_cast<std::int64_t>(id), 0);
          } else {
            QueuedFrame qf;
            qf.t_gen = now;
            qf.id = id;
            qf.size = cfg.frame_bytes;
            qf.priority = r.priority;
            qf.stream = r.stream;
            if (port.enqueue(qf) == EnqueueResult::QueueFull) {
              ++stats.tail_dropped;
              record(TraceEventKind::TailDrop, now, static_cast<std::int16_t>(r.priority),
                     static_cast<std::int16_t>(r.priority), stream_col,
                     static_cast<std::int64_t>(id), 0);
            } else {
              try_start(now);
            }
          }
        }

        // next arrival, exact rational inter-arrival spacing
        const std::uint64_t num = 1'000'000'000'000ull;
        src.next += static_cast<Ps>(num / cfg.rate_pps);
        src.acc += num % cfg.rate_pps;
        if (src.acc >= cfg.rate_pps) {
          src.next += 1;
          src.acc -= cfg.rate_pps;
        }
        const Ps src_end = cfg.duration < 0 ? end : std::min(end, cfg.start + cfg.duration);
        if (src.next < src_end) push(src.next, EvKind::DataArrival, ev.a);
        break;
      }
      case EvKind::TxComplete: {
        if (in_flight && in_flight->t_done == now) {
          const Transmission& tx = *in_flight;
          record(TraceEventKind::Egress, tx.t_done, tx.queue, tx.frame.priority,
                 tx.frame.stream == kWildcard ? -1 : tx.frame.stream,
                 static_cast<std::int64_t>(tx.frame.id), 0);
          in_flight.reset();
        }
        try_start(now);
        break;
      }
    }
  }

  stats.in_queue_at_end = port.total_queued();
  return stats;
}

RunResult run_full(const Scenario& s) {
  RunResult result;
  VectorSink sink(result.trace);
  result.stats = run_with_sink(s, sink);
  return result;
}

Trace run(const Scenario& s) { return run_full(s).trace; }

std::vector<std::pair<Ns, int>> control_frame_schedule(Ns period_ns, const DelayModel& gap_model,
                                                       Ns horizon_ns, std::uint64_t seed) {
  (void)period_ns;  // emissions are free-running; the period shapes only the MAT lookups
  if (horizon_ns <= 0) throw EngineError("horizon must be positive");
  ControlGen gen(gap_model, Rng(seed));
  std::vector<std::pair<Ns, int>> out;
  for (;;) {
    const auto [t, q] = gen.emit();
    if (t >= horizon_ns) break;
    out.emplace_back(t, q);
  }
  return out;
}

}  // namespace tassim
