#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "tassim/engine.hpp"
#include "tassim/measure.hpp"
#include "tassim/presets.hpp"

using namespace tassim;

namespace {

Scenario control_only_scenario(Ns entry_ns = 1'000) {
  Scenario s;
  s.tgcl = make_round_robin_tgcl(entry_ns);
  s.tg_model = DelayModel::make_constant(0);
  s.queue_model = DelayModel::make_constant(0);
  s.control_model = DelayModel::make_constant(0);
  s.seed = 1;
  s.sim_duration = ns_to_ps(entry_ns * 8 * 10);  // ten cycles
  return s;
}

}  // namespace

TEST_CASE("control frame emissions: constant nine nanosecond gaps") {
  const auto frames = control_frame_schedule(400'000, DelayModel::make_constant(9), 72);
  REQUIRE(frames.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(frames[static_cast<std::size_t>(i)].first == 9 * i);
    CHECK(frames[static_cast<std::size_t>(i)].second == i);
  }
}

TEST_CASE("control frame emissions: a zero-gap batch is coincident") {
  const auto frames = control_frame_schedule(400'000, DelayModel::make_constant(0), 2);
  REQUIRE(frames.size() >= 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(frames[static_cast<std::size_t>(i)].first == 0);
    CHECK(frames[static_cast<std::size_t>(i)].second == i);
  }
  // the generator still makes progress afterwards
  CHECK(frames[8].first == 1);
}

TEST_CASE("control frame emissions: scripted gaps stretch the batch") {
  const auto frames = control_frame_schedule(
      400'000, DelayModel::make_scripted({9, 9, 9, 9, 9, 9, 9, 12}), 76);
  REQUIRE(frames.size() == 9);
  CHECK(frames[7].first == 63);  // last frame of the first batch
  CHECK(frames[8].first == 75);  // next batch starts after the 12 ns gap
  CHECK(frames[8].second == 0);
}

TEST_CASE("per-queue update cadence is the batch length") {
  const auto frames = control_frame_schedule(400'000, DelayModel::make_constant(9), 300);
  for (std::size_t i = 8; i < frames.size(); ++i)
    CHECK(frames[i].first - frames[i - 8].first == 72);
}

TEST_CASE("control frame enumeration needs a positive horizon") {
  CHECK_THROWS_AS(control_frame_schedule(400'000, DelayModel::make_constant(9), 0), EngineError);
}

TEST_CASE("control-plane-only run follows the schedule exactly under zero delays") {
  const Scenario s = control_only_scenario();
  const RunResult r = run_full(s);
  CHECK(r.stats.frames_generated == 0);

  // With all delay models at zero and a control frame for every queue each
  // nanosecond, every gate change lands exactly on its schedule boundary.
  const Gcl gcl = effective_tgcl(s);
  for (const TraceEvent& e : r.trace.events) {
    if (e.kind != TraceEventKind::GateEffective) continue;
    const Ns rel = ps_to_ns(e.time) % gcl.period_ns;
    const bool on_boundary = rel % 1'000 == 0;
    CHECK(on_boundary);
    // an opening change lands at the start of the entry opening that queue
    if (e.aux == 1) CHECK(entry_at(gcl, rel).second->gates.open(e.queue));
  }
  CHECK(r.stats.gate_changes > 0);
}

TEST_CASE("same seed gives byte-identical traces") {
  const Scenario s = testbed_scenario(30, 7, 1'000'000 * 1'000);  // 1 ms
  std::string first;
  for (int i = 0; i < 3; ++i) {
    std::ostringstream os;
    CsvSink sink(os);
    run_with_sink(s, sink);
    if (i == 0) first = os.str();
    else CHECK(os.str() == first);
  }
  CHECK(first.size() > 1'000);
}

TEST_CASE("different seeds give different traces") {
  Scenario a = testbed_scenario(30, 1, 500'000 * 1'000);
  Scenario b = testbed_scenario(30, 2, 500'000 * 1'000);
  std::ostringstream oa, ob;
  {
    CsvSink sink(oa);
    run_with_sink(a, sink);
  }
  {
    CsvSink sink(ob);
    run_with_sink(b, sink);
  }
  CHECK(oa.str() != ob.str());
}

TEST_CASE("every generated frame is accounted for") {
  Scenario s = testbed_scenario(30, 3, 2'000'000 * 1'000);  // 2 ms
  s.record_mask = 0;                                        // counters only
  Trace unused;
  VectorSink sink(unused);
  RunStats stats = run_with_sink(s, sink);
  CHECK(stats.frames_generated ==
        stats.frames_transmitted + stats.psfp_dropped + stats.tail_dropped +
            stats.translate_dropped + stats.in_queue_at_end);
  CHECK(stats.frames_generated > 1'000'000);  // 514 Mpps for 2 ms
  CHECK(stats.frames_transmitted > 0);
  CHECK(stats.tail_dropped > 0);  // saturating load must shed
}

TEST_CASE("causality: no event precedes the run start and times never decrease") {
  const Scenario s = testbed_scenario(0, 5, 300'000 * 1'000);
  const RunResult r = run_full(s);
  Ps prev = 0;
  for (const TraceEvent& e : r.trace.events) {
    CHECK(e.time >= prev);
    prev = e.time;
  }
  CHECK_FALSE(r.trace.events.empty());
}

TEST_CASE("control frames never occupy data queues") {
  Scenario s = control_only_scenario();
  const RunResult r = run_full(s);
  for (const TraceEvent& e : r.trace.events) {
    CHECK(e.kind != TraceEventKind::Dequeue);
    CHECK(e.kind != TraceEventKind::Egress);
  }
  CHECK(r.stats.control_frames > 0);
  CHECK(r.stats.frames_transmitted == 0);
}

TEST_CASE("scenario validation rejects structural errors") {
  Scenario s = control_only_scenario();
  s.sim_duration = 0;
  CHECK_THROWS_AS(validate_scenario(s), EngineError);

  s = control_only_scenario();
  s.tgcl.period_ns += 1;
  CHECK_THROWS_AS(validate_scenario(s), EngineError);

  s = control_only_scenario();
  TrafficSource bad;
  bad.rate_pps = 0;
  s.sources.push_back(bad);
  CHECK_THROWS_AS(validate_scenario(s), EngineError);

  s = control_only_scenario();
  bad.rate_pps = 1'000;
  bad.frame_bytes = 32;
  s.sources.push_back(bad);
  CHECK_THROWS_AS(validate_scenario(s), EngineError);
}

TEST_CASE("more than fifteen distinct periods are rejected") {
  Scenario s = control_only_scenario(1'000);  // period 8000
  for (int i = 0; i < 15; ++i) {
    SgclConfig cfg;
    cfg.gcl.kind = GclKind::Stream;
    cfg.gcl.gate_id = static_cast<std::uint32_t>(i + 1);
    cfg.gcl.entries.push_back({1'000 + i + 1, {}, true, false});
    cfg.gcl.period_ns = 1'000 + i + 1;
    s.sgcls.push_back(cfg);
  }
  CHECK_THROWS_AS(validate_scenario(s), EngineError);
  s.sgcls.pop_back();  // 14 stream periods + the schedule period = 15
  CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("validation pre-checks table capacities by compiling") {
  Scenario s = control_only_scenario();
  s.tgcl_capacity = 8;  // eight queues of entry zero alone exceed this
  CHECK_THROWS_AS(validate_scenario(s), CapacityError);
}

TEST_CASE("psfp gating drops out-of-window frames before queueing") {
  Scenario s;
  s.tgcl = make_round_robin_tgcl(1'000);
  s.tg_model = DelayModel::make_constant(0);
  s.queue_model = DelayModel::make_constant(0);
  s.control_model = DelayModel::make_constant(9);

  SgclConfig gate;
  gate.gcl.kind = GclKind::Stream;
  gate.gcl.gate_id = 1;
  gate.gcl.entries.push_back({4'000, {}, true, false});
  gate.gcl.entries.push_back({4'000, {}, false, false});
  gate.gcl.period_ns = 8'000;
  s.sgcls.push_back(gate);

  StreamTableEntry id;
  id.key.eth_dst = 0xaabbccdd0000ull;
  id.action.kind = StreamActionKind::Identify;
  id.action.stream_handle = 1;
  id.action.sgcl_id = 1;
  id.action.priority = 5;
  s.stream_entries.push_back(id);

  TrafficSource src;
  src.rate_pps = 100'000'000;  // one frame per 10 ns
  src.priority = 5;
  s.sources.push_back(src);

  s.seed = 9;
  s.sim_duration = ns_to_ps(80'000);
  const RunResult r = run_full(s);
  CHECK(r.stats.psfp_dropped > 0);
  // admitted about half the time
  const double admitted =
      static_cast<double>(r.stats.frames_generated - r.stats.psfp_dropped) /
      static_cast<double>(r.stats.frames_generated);
  CHECK(admitted > 0.4);
  CHECK(admitted < 0.6);
  // every arrival inside a closed window must have a drop event, and drops
  // never appear as dequeues
  for (const TraceEvent& e : r.trace.events) {
    if (e.kind != TraceEventKind::PsfpDrop) continue;
    const Ns rel = ps_to_ns(e.time) % 8'000;
    CHECK(rel >= 4'000);
  }
}

TEST_CASE("run statistics expose completions and control load") {
  const Scenario s = control_only_scenario();
  const RunResult r = run_full(s);
  CHECK(r.stats.completions == 9);  // one per period boundary inside the horizon
  CHECK(r.stats.control_frames > 50'000);
}

TEST_CASE("source rate carries its rounding residue without drift") {
  Scenario s = control_only_scenario(1'000);
  TrafficSource src;
  src.rate_pps = 514'000'000;  // inter-arrival 1945.525... ps
  src.priority = 0;
  s.sources.push_back(src);
  s.record_mask = 0;
  s.sim_duration = ns_to_ps(1'000'000);  // 1 ms
  Trace unused;
  VectorSink sink(unused);
  const RunStats stats = run_with_sink(s, sink);
  CHECK(stats.frames_generated == 514'000);  // exactly rate x time
}

TEST_CASE("stream gates with their own period use their own reference") {
  Scenario s;
  s.tgcl = make_round_robin_tgcl(1'000);  // period 8000
  s.tg_model = DelayModel::make_constant(0);
  s.queue_model = DelayModel::make_constant(0);
  s.control_model = DelayModel::make_constant(9);

  SgclConfig gate;  // period 12000, open for the first half
  gate.gcl.kind = GclKind::Stream;
  gate.gcl.gate_id = 1;
  gate.gcl.entries.push_back({6'000, {}, true, false});
  gate.gcl.entries.push_back({6'000, {}, false, false});
  gate.gcl.period_ns = 12'000;
  s.sgcls.push_back(gate);

  StreamTableEntry id;
  id.key.eth_dst = 0xaabbccdd0000ull;
  id.action.kind = StreamActionKind::Identify;
  id.action.stream_handle = 1;
  id.action.sgcl_id = 1;
  id.action.priority = 6;
  s.stream_entries.push_back(id);

  TrafficSource src;
  src.rate_pps = 50'000'000;  // every 20 ns
  src.priority = 6;
  s.sources.push_back(src);

  s.seed = 4;
  s.sim_duration = ns_to_ps(240'000);  // 20 stream-gate periods
  const RunResult r = run_full(s);
  REQUIRE(r.stats.psfp_dropped > 0);
  // drops must track the 12 us stream-gate period, not the 8 us schedule
  for (const TraceEvent& e : r.trace.events) {
    if (e.kind != TraceEventKind::PsfpDrop) continue;
    const Ns rel = ps_to_ns(e.time) % 12'000;
    CHECK(rel >= 6'000);
  }
  const double admitted =
      static_cast<double>(r.stats.frames_generated - r.stats.psfp_dropped) /
      static_cast<double>(r.stats.frames_generated);
  CHECK(admitted > 0.45);
  CHECK(admitted < 0.55);
}

TEST_CASE("queue and control delay models must be non-negative") {
  Scenario s = control_only_scenario();
  s.queue_model = DelayModel::make_uniform(-1, 5);
  CHECK_THROWS_AS(validate_scenario(s), EngineError);

  s = control_only_scenario();
  s.control_model = DelayModel::make_scripted({9, -2});
  CHECK_THROWS_AS(validate_scenario(s), EngineError);

  s = control_only_scenario();
  s.tg_model = DelayModel::make_uniform(-11, 11);  // signed by design
  CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("an ideal run measures entry durations to within the quantization") {
  // Zero delays everywhere, per-queue sources: the only deviation left is
  // the serialization grid and the source inter-arrival gap.
  Scenario s;
  s.tgcl = make_round_robin_tgcl(1'000);
  s.tg_model = DelayModel::make_constant(0);
  s.queue_model = DelayModel::make_constant(0);
  s.control_model = DelayModel::make_constant(0);  // degenerates to one batch per ns
  for (int q = 0; q < kNumQueues; ++q) {
    TrafficSource src;
    src.rate_pps = 50'000'000;  // 20 ns apart
    src.priority = q;
    s.sources.push_back(src);
  }
  s.seed = 2;
  s.sim_duration = ns_to_ps(500'000);
  s.record_mask = record_bit(TraceEventKind::Egress) | record_bit(TraceEventKind::Completion);
  const RunResult r = run_full(s);
  const SliceResult slice = measure_slice_deviation(r.trace, 1'000, 8'000);
  REQUIRE(slice.run_values.size() > 300);
  const Ps bound = ns_to_ps(20) + 2 * serialization_ps(64, s.link_bps);
  for (const Ps v : slice.run_values) CHECK(std::abs(v) <= bound);
}
