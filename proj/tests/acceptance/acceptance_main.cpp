// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
// process exits nonzero if any criterion fails.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>
#include <vector>

#include "tassim/dataplane.hpp"
#include "tassim/engine.hpp"
#include "tassim/measure.hpp"
#include "tassim/presets.hpp"
#include "tassim/rng.hpp"
#include "tassim/tcam.hpp"

using namespace tassim;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// Exact-cover oracle: prefixes must come out low-to-high, each block aligned
// and contiguous with the previous one, ending exactly at hi.
bool covers_exactly(const std::vector<Prefix>& prefixes, std::uint64_t lo, std::uint64_t hi,
                    int width) {
  const std::uint64_t dom = width >= 64 ? ~0ull : (1ull << width) - 1;
  std::uint64_t next = lo;
  bool closed = false;
  for (const Prefix& p : prefixes) {
    if (closed) return false;  // rows after the range closed would overlap
    const std::uint64_t wild = ~p.mask & dom;
    if ((wild & (wild + 1)) != 0) return false;  // wildcards must be the low bits
    if ((p.value & wild) != 0) return false;     // block must be aligned
    if (p.value != next) return false;           // gapless, in order
    const std::uint64_t end = p.value | wild;
    if (end > hi) return false;
    if (end == hi) {
      closed = true;
    } else {
      next = end + 1;
    }
  }
  return closed;
}

void criterion_range_cover() {
  std::size_t cases = 0;
  bool ok = true;
  std::string detail;

  for (int w = 1; w <= 10 && ok; ++w) {
    const std::uint64_t top = (1ull << w) - 1;
    const std::size_t bound = w == 1 ? 1 : static_cast<std::size_t>(2 * w - 2);
    for (std::uint64_t lo = 0; lo <= top && ok; ++lo) {
      for (std::uint64_t hi = lo; hi <= top; ++hi) {
        const auto p = range_to_prefixes(lo, hi, w);
        ++cases;
        if (!covers_exactly(p, lo, hi, w) || p.size() > bound) {
          ok = false;
          detail = "cover failed at (" + std::to_string(lo) + "," + std::to_string(hi) +
                   ",w=" + std::to_string(w) + ")";
          break;
        }
      }
    }
  }

  Rng rng(2024);
  for (int i = 0; i < 10'000 && ok; ++i) {
    const int w = 2 + static_cast<int>(rng.bounded(15));  // 2..16
    const std::uint64_t top = (1ull << w) - 1;
    const std::uint64_t a = rng.bounded(top + 1), b = rng.bounded(top + 1);
    const std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
    const auto p = range_to_prefixes(lo, hi, w);
    ++cases;
    if (!covers_exactly(p, lo, hi, w) || p.size() > static_cast<std::size_t>(2 * w - 2)) {
      ok = false;
      detail = "random cover failed at w=" + std::to_string(w);
    }
  }

  for (int w = 2; w <= 16 && ok; ++w) {
    const auto p = range_to_prefixes(1, (1ull << w) - 2, w);
    if (p.size() != static_cast<std::size_t>(2 * w - 2)) {
      ok = false;
      detail = "bound not attained at w=" + std::to_string(w);
    }
  }

  if (ok)
    detail = "range-to-ternary exact disjoint cover over " + std::to_string(cases) +
             " ranges, count <= 2w-2 and attained at (1, 2^w-2)";
  report(1, ok, detail);
}

void criterion_compile_budget() {
  std::ostringstream detail;
  bool ok = true;
  detail << "compiled row counts vs the 1512 reference:";
  for (const GsiMode mode : {GsiMode::ShrinkEntries, GsiMode::ExtendPeriod}) {
    Scenario t = testbed_scenario(30, 1, 1'000'000);
    t.gsi_mode = mode;
    const Gcl gcl = effective_tgcl(t);
    const MatTable mat = compile_tgcl(gcl);
    const std::size_t bound = 8 * gcl.entries.size() * (2 * 48 - 2);
    if (mat.size() > bound) ok = false;
    detail << (mode == GsiMode::ShrinkEntries ? " shrink-entries=" : " extend-period=")
           << mat.size() << " (bound " << bound << ", delta "
           << (static_cast<long>(mat.size()) - 1512) << ")";
  }
  detail << "; the delta is encoding-dependent (interval placement, closed-queue rows), "
            "documented in `repro scalability`";
  report(2, ok, detail.str());
}

void criterion_capacity() {
  bool ok = true;
  std::string detail = "capacity enforcement:";

  // transmission table: 1 ns entries yield eight rows each, overflowing at row 39001
  {
    Gcl gcl;
    gcl.kind = GclKind::Transmission;
    const int n = 4'876;  // 8n = 39008 > 39000
    for (int i = 0; i < n; ++i) gcl.entries.push_back({1, GateVector::only(i % 8), false, false});
    gcl.period_ns = n;
    try {
      compile_tgcl(gcl);
      ok = false;
      detail += " tGCL overflow NOT caught;";
    } catch (const CapacityError&) {
      detail += " tGCL row 39001 rejected;";
    }
  }
  // stream gate table: 6001 one-nanosecond windows, one row each
  {
    Gcl sgcl;
    sgcl.kind = GclKind::Stream;
    sgcl.gate_id = 1;
    for (int i = 0; i < 6'001; ++i) sgcl.entries.push_back({1, {}, i % 2 == 0, false});
    sgcl.period_ns = 6'001;
    try {
      compile_sgcl(sgcl);
      ok = false;
      detail += " sGCL overflow NOT caught;";
    } catch (const CapacityError&) {
      detail += " sGCL row 6001 rejected;";
    }
  }
  // identification table
  {
    StreamTable table;
    for (int i = 0; i < 8'196; ++i) table.add(StreamTableEntry{});
    try {
      table.add(StreamTableEntry{});
      ok = false;
      detail += " stream entry 8197 NOT caught";
    } catch (const CapacityError&) {
      detail += " stream entry 8197 rejected";
    }
  }
  // boundary sanity: exactly-full tables pass the check
  {
    MatTable t("tGCL", kTgclCapacity, 48);
    for (std::size_t i = 0; i < kTgclCapacity; ++i) t.add(TernaryEntry{});
    if (!capacity_check(t).ok) ok = false;
  }
  report(3, ok, detail);
}

void criterion_arithmetic() {
  const bool ok = internal_delay_total(11, 63, 12) == 86 &&
                  predicted_entry_duration(50'000, -11, 86) == 50'097;
  report(4, ok, "internal delay 11+63+12 = 86 ns, worst-case entry duration 50097 ns");
}

void criterion_scripted_consistency() {
  // Scenario: two queues at control slots 0 and 18 within the 72 ns batch,
  // data entries of 2011 ns plus 5 ns switching intervals on a 4032 ns period
  // (a multiple of both 72 ns and the 42 ns grid where nanosecond instants
  // realign with the 1.68 ns frame time). With the scripted queue delays
  // every boundary instant has a closed form:
  //   close q0 at rel 2011 -> slot 2016, delay script[0]=7  -> effective 2023
  //   open  q2 at rel 2016 -> slot 2034, delay script[1]=12 -> effective 2046
  //   open  q0 at rel 0    -> slot 0,    delay script[2]=9  -> effective +9
  //   close q2 at rel 4027 -> slot +18,  delay script[3]=12 -> effective +30
  // The q2 run spans 2046..4062 (2016 ns, an exact multiple of the frame
  // time); the q0 run starts at the q2 close (4062-4032 = 30) and ends at
  // 2023, i.e. 1993 ns truncated to the frame grid.
  const Ps ser = serialization_ps(64, 400'000'000'000ull);
  const Ps expected_q2 = 2'016 * 1'000 - ser;
  const Ps expected_q0 = (1'993'000 / ser) * ser;

  // The same durations through the boundary-shift form, rebased so the larger
  // boundary shift is the zero point: d + |shift_start - base| gives back the
  // base, and shift_end - base closes the difference.
  const Ns pred_q0 = predicted_entry_duration(2'011, 0, 12 - 30);  // start 30, end 12
  const Ns pred_q2 = predicted_entry_duration(2'011, 30 - 35, 0);  // start 30, end 35

  const Scenario s = scripted_boundary_scenario(1, 100'000'000ll * 1'000);
  SliceAccumulator acc(SliceOptions{2'011, 2, effective_tgcl(s).period_ns});
  struct Sink : TraceSink {
    SliceAccumulator* a;
    void on_event(const TraceEvent& e) override {
      if (e.kind == TraceEventKind::Egress) a->on_egress(e.time, e.priority);
    }
  } sink;
  sink.a = &acc;
  run_with_sink(s, sink);
  const SliceResult r = acc.finish();

  std::size_t cycles_checked = 0;
  bool ok = true;
  std::string detail;
  std::size_t q0_runs_seen = 0;
  for (std::size_t i = 0; i < r.run_values.size(); ++i) {
    const bool is_q0 = r.run_priorities[i] == 0;
    if (is_q0) ++q0_runs_seen;
    if (q0_runs_seen <= 2) continue;  // backlog still building in the first cycles
    const Ps measured = r.run_values[i] + ns_to_ps(2'011);
    const Ps expected = is_q0 ? expected_q0 : expected_q2;
    const Ps predicted = ns_to_ps(is_q0 ? pred_q0 : pred_q2);
    if (measured != expected) {
      ok = false;
      detail = "run " + std::to_string(i) + " measured " + std::to_string(measured) +
               " ps, closed form " + std::to_string(expected) + " ps";
      break;
    }
    if (std::abs(measured - predicted) > ser) {
      ok = false;
      detail = "run " + std::to_string(i) +
               " off the boundary-shift prediction by more than one frame time";
      break;
    }
    if (is_q0) ++cycles_checked;
  }
  if (ok && cycles_checked < 100) {
    ok = false;
    detail = "only " + std::to_string(cycles_checked) + " cycles measured";
  }
  if (ok)
    detail = "measured entry durations matched the boundary-shift prediction within one "
             "1.68 ns frame time over " +
             std::to_string(cycles_checked) + " cycles (and the closed form exactly)";
  report(5, ok, detail);
}

void criterion_delay_bounds() {
  bool ok = true;
  std::ostringstream detail;

  {
    const RunResult r = run_full(tg_accuracy_scenario(1, 100'000'000ll * 1'000));
    const SeriesSummary s = measure_tg(r.trace).summary();
    const bool part = s.count >= 100 && s.min >= ns_to_ps(-11) && s.max <= ns_to_ps(11);
    ok &= part;
    detail << "tg in [" << s.min / 1000.0 << "," << s.max / 1000.0 << "] ns (n=" << s.count
           << ")";
  }
  {
    const RunResult r = run_full(queue_delay_scenario(1, 400'000'000ll * 1'000));
    const SeriesSummary s = measure_queue_delay(r.trace).summary();
    const double mean_ns = s.mean / 1000.0;
    const bool part = s.count >= 1'000 && s.min >= ns_to_ps(1) && s.max <= ns_to_ps(63) &&
                      mean_ns >= 13.63 && mean_ns <= 15.63;
    ok &= part;
    detail << "; queue in [" << s.min / 1000.0 << "," << s.max / 1000.0 << "] ns mean "
           << mean_ns << " (n=" << s.count << ")";
  }
  {
    const RunResult r = run_full(control_delay_scenario(1, 2'000'000ll * 1'000));
    const SeriesSummary s = measure_control_delay(r.trace).summary();
    const bool part = s.count >= 10'000 && s.median == ns_to_ps(9) && s.max <= ns_to_ps(12);
    ok &= part;
    detail << "; control median " << s.median / 1000.0 << " ns max " << s.max / 1000.0
           << " ns (n=" << s.count << ")";
  }
  report(6, ok, detail.str());
}

struct OverlapJob {
  std::uint64_t seed;
  Ns gsi;
  std::size_t overlaps = 0;
};

void criterion_overlap() {
  std::vector<OverlapJob> jobs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    jobs.push_back({seed, 0, 0});
    jobs.push_back({seed, 30, 0});
  }
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TAS_SIM_THREADS")) threads = std::atoi(env);
  threads = std::max(1, std::min(threads, 8));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Scenario s = testbed_scenario(jobs[i].gsi, jobs[i].seed, 100'000'000ll * 1'000);
      OverlapDetector det(effective_tgcl(s));
      struct Sink : TraceSink {
        OverlapDetector* d;
        void on_event(const TraceEvent& e) override {
          if (e.kind == TraceEventKind::Egress) d->on_egress(e.time, e.priority);
          else if (e.kind == TraceEventKind::Completion && e.stream == 0)
            d->on_completion(e.time);
        }
      } sink;
      sink.d = &det;
      run_with_sink(s, sink);
      jobs[i].overlaps = det.finish().size();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool ok = true;
  std::ostringstream detail;
  detail << "overlap windows per seed (no interval / 30 ns interval):";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::size_t none = 0, with = 0;
    for (const OverlapJob& j : jobs) {
      if (j.seed != seed) continue;
      (j.gsi == 0 ? none : with) = j.overlaps;
    }
    detail << " " << none << "/" << with;
    if (none == 0 || with != 0) ok = false;
  }
  report(7, ok, detail.str());
}

void criterion_slice_shape() {
  const Scenario s = slice_bound_scenario(1, 100'000'000ll * 1'000);
  const Gcl schedule = effective_tgcl(s);
  SliceAccumulator acc(SliceOptions{1'989, 2, schedule.period_ns});
  OverlapDetector det(schedule);
  struct Sink : TraceSink {
    SliceAccumulator* a;
    OverlapDetector* d;
    void on_event(const TraceEvent& e) override {
      if (e.kind == TraceEventKind::Egress) {
        a->on_egress(e.time, e.priority);
        d->on_egress(e.time, e.priority);
      } else if (e.kind == TraceEventKind::Completion && e.stream == 0) {
        d->on_completion(e.time);
      }
    }
  } sink;
  sink.a = &acc;
  sink.d = &det;
  run_with_sink(s, sink);
  const SliceResult r = acc.finish();
  const auto overlaps = det.finish();

  const DelaySeries all = r.combined();
  const SeriesSummary sum = all.summary();
  const BimodalityResult bi = bimodality_check(all);
  const CycleSums cycles = per_cycle_sums(r, 0, 8);
  Ps worst = 0;
  for (const Ps v : cycles.sums) worst = std::max(worst, std::abs(v));

  const bool ok = bi.bimodal && bi.negative_mode_ns < 0 && bi.positive_mode_ns > 0 &&
                  !cycles.sums.empty() && cycles.incomplete == 0 && worst <= ns_to_ps(97) &&
                  sum.min >= ns_to_ps(-250) && overlaps.empty();
  std::ostringstream detail;
  detail << "slice deviations bimodal at ~" << bi.negative_mode_ns << "/+"
         << bi.positive_mode_ns << " ns (median " << sum.median / 1000.0
         << " ns, locations reported not asserted); |cycle sum| <= " << worst / 1000.0
         << " ns over " << cycles.sums.size() << " cycles; min " << sum.min / 1000.0 << " ns";
  report(8, ok, detail.str());
}

void criterion_psfp_properties() {
  Gcl sgcl;
  sgcl.kind = GclKind::Stream;
  sgcl.gate_id = 1;
  sgcl.entries.push_back({137, {}, true, false});
  sgcl.entries.push_back({263, {}, false, false});
  sgcl.entries.push_back({100, {}, true, false});
  sgcl.period_ns = 500;

  EgressPort port(0, 400'000'000'000ull, 1 << 14);
  Rng rng(77);
  bool ok = true;
  std::size_t drops = 0, buffered = 0;
  for (int i = 0; i < 10'000 && ok; ++i) {
    Frame f;
    f.stream = 1;
    f.priority = static_cast<std::uint8_t>(rng.bounded(8));
    const Ns rel = static_cast<Ns>(rng.bounded(700));  // beyond-period values clamp
    const auto [idx, entry] = entry_at(sgcl, rel);
    const std::size_t before = port.total_queued();
    if (psfp_gate(f, sgcl, rel) == PsfpDecision::Drop) {
      ++drops;
      ok &= !entry->stream_open;
      ok &= port.total_queued() == before;  // dropped before queuing
    } else {
      ok &= entry->stream_open;
      QueuedFrame qf;
      qf.priority = f.priority;
      ok &= port.enqueue(qf) == EnqueueResult::Ok;  // closed gates buffer, never drop
      ++buffered;
      ok &= port.total_queued() == before + 1;
    }
    ok &= port.transmit_step(i) == std::nullopt;  // every transmission gate closed
  }
  ok &= drops > 1'000 && buffered > 1'000;
  ok &= port.total_queued() == buffered;
  report(9, ok,
         "10000 randomized frames: " + std::to_string(drops) +
             " out-of-window drops left queues untouched, " + std::to_string(buffered) +
             " in-window frames buffered behind closed gates");
}

void criterion_determinism() {
  Scenario s = testbed_scenario(30, 42, 1'000'000ll * 1'000);
  s.record_mask = 0xffffffffu;
  std::string first;
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    std::ostringstream os;
    CsvSink sink(os);
    run_with_sink(s, sink);
    if (i == 0) first = os.str();
    else ok &= os.str() == first;
  }
  ok &= first.size() > 100'000;
  report(10, ok, "three identical runs produced byte-identical traces (" +
                     std::to_string(first.size()) + " bytes each)");
}

void criterion_roundtrip() {
  StreamTable table;
  for (int p = 0; p < 8; ++p) {
    StreamTableEntry e;
    e.key.s_label = 100 + static_cast<std::uint32_t>(p);
    e.action.kind = StreamActionKind::Translate;
    e.action.vlan_id = static_cast<std::uint16_t>(10 + p);
    e.action.priority = static_cast<std::uint8_t>(p);
    table.add(e);
  }
  Rng rng(123);
  bool ok = true;
  for (int i = 0; i < 1'000 && ok; ++i) {
    Frame f;
    f.kind = FrameKind::Data;
    f.eth_dst = rng.next() & 0xffffffffffffull;
    f.size = 64 + static_cast<std::uint32_t>(rng.bounded(1454));
    f.priority = static_cast<std::uint8_t>(rng.bounded(8));
    Mpls mpls;
    const int labels = 1 + static_cast<int>(rng.bounded(4));
    for (int l = 0; l < labels; ++l)
      mpls.f_labels.push_back(static_cast<std::uint32_t>(rng.bounded(1 << 20)));
    mpls.s_label = 100 + static_cast<std::uint32_t>(rng.bounded(8));
    mpls.dcw_seq = static_cast<std::uint32_t>(rng.bounded(1 << 16));
    f.mpls = mpls;

    const Frame shaped = translate_detnet_to_tsn(f, table).frame;
    const Frame restored = translate_tsn_to_detnet(shaped);
    ok &= restored.mpls == f.mpls && restored.eth_dst == f.eth_dst &&
          restored.size == f.size && !restored.vlan.has_value();
  }
  report(11, ok, "vlan push/pop restored 1000 randomized label stacks exactly");
}

}  // namespace

int main() {
  criterion_range_cover();
  criterion_compile_budget();
  criterion_capacity();
  criterion_arithmetic();
  criterion_scripted_consistency();
  criterion_delay_bounds();
  criterion_overlap();
  criterion_slice_shape();
  criterion_psfp_properties();
  criterion_determinism();
  criterion_roundtrip();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
