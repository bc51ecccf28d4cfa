#include "tassim/presets.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "tassim/measure.hpp"
#include "tassim/tcam.hpp"

namespace tassim {

namespace {

constexpr Ps kMs = 1'000'000'000;  // 1 ms in ps

DelayModel point_mass(Ns value) {
  return DelayModel::make_empirical({{value, 1.0}});
}

std::uint32_t mask_of(std::initializer_list<TraceEventKind> kinds) {
  std::uint32_t m = 0;
  for (TraceEventKind k : kinds) m |= record_bit(k);
  return m;
}

}  // namespace

Scenario testbed_scenario(Ns gsi_ns, std::uint64_t seed, Ps duration) {
  Scenario s;
  s.name = gsi_ns > 0 ? "testbed-gsi" : "testbed-nogsi";
  s.tgcl = make_round_robin_tgcl(50'000);
  s.gsi_ns = gsi_ns;
  s.gsi_mode = GsiMode::ShrinkEntries;
  s.tg_model = default_tg_model();
  s.queue_model = default_queue_model();
  s.control_model = default_control_model();
  s.queue_hold_ns = 50'000;

  TrafficSource src;
  src.rate_pps = 514'000'000;
  src.frame_bytes = 64;
  src.priority = -1;
  src.mpls = true;
  src.s_label_base = 100;
  src.eth_dst = 0x001122334455ull;
  s.sources.push_back(src);

  for (int p = 0; p < kNumQueues; ++p) {
    StreamTableEntry tr;
    tr.key.s_label = 100 + static_cast<std::uint32_t>(p);
    tr.action.kind = StreamActionKind::Translate;
    tr.action.vlan_id = static_cast<std::uint16_t>(10 + p);
    tr.action.priority = static_cast<std::uint8_t>(p);
    s.stream_entries.push_back(tr);

    StreamTableEntry id;
    id.key.eth_dst = src.eth_dst;
    id.key.vlan_id = static_cast<std::uint32_t>(10 + p);
    id.action.kind = StreamActionKind::Identify;
    id.action.stream_handle = static_cast<std::uint32_t>(p + 1);
    id.action.priority = static_cast<std::uint8_t>(p);
    s.stream_entries.push_back(id);
  }

  s.seed = seed;
  s.sim_duration = duration;
  s.record_mask = mask_of({TraceEventKind::Completion, TraceEventKind::Egress});
  return s;
}

Scenario tg_accuracy_scenario(std::uint64_t seed, Ps duration) {
  Scenario s;
  s.name = "tg-accuracy";
  s.tgcl = make_round_robin_tgcl(50'000);
  s.tg_model = default_tg_model();
  s.queue_model = default_queue_model();
  s.control_model = default_control_model();
  s.seed = seed;
  s.sim_duration = duration;
  s.record_mask = mask_of({TraceEventKind::Completion});
  return s;
}

Scenario queue_delay_scenario(std::uint64_t seed, Ps duration) {
  Scenario s;
  s.name = "queue-delay";
  s.tgcl = make_round_robin_tgcl(100'000);
  s.tg_model = default_tg_model();
  s.queue_model = default_queue_model();
  s.control_model = default_control_model();
  s.queue_hold_ns = 100'000;

  TrafficSource src;
  src.rate_pps = 8'000'000;
  src.priority = -1;
  s.sources.push_back(src);

  s.seed = seed;
  s.sim_duration = duration;
  s.record_mask = mask_of({TraceEventKind::GateWrite, TraceEventKind::Dequeue});
  return s;
}

Scenario control_delay_scenario(std::uint64_t seed, Ps duration) {
  Scenario s;
  s.name = "control-delay";
  s.tgcl = make_round_robin_tgcl(50'000);
  s.tg_model = default_tg_model();
  s.queue_model = default_queue_model();
  s.control_model = default_control_model();
  s.seed = seed;
  s.sim_duration = duration;
  s.record_mask = mask_of({TraceEventKind::Ctrl});
  return s;
}

Scenario scripted_boundary_scenario(std::uint64_t seed, Ps duration) {
  Scenario s;
  s.name = "scripted-boundary";
  // Two queues with batch-separated slots (0 and 2), entries of 2016 ns:
  // 2016 is a multiple of both the 72 ns batch cadence and the 42 ns grid on
  // which nanosecond instants and the 1.68 ns serialization time realign.
  s.tgcl.kind = GclKind::Transmission;
  for (int q : {0, 2}) {
    GclEntry e;
    e.duration_ns = 2016;
    e.gates = GateVector::only(q);
    s.tgcl.entries.push_back(e);
  }
  s.tgcl.period_ns = 4032;
  s.gsi_ns = 5;
  s.gsi_mode = GsiMode::ShrinkEntries;
  s.tg_model = DelayModel::make_constant(0);
  s.control_model = DelayModel::make_constant(9);
  s.queue_model = DelayModel::make_scripted({7, 12, 9, 12});
  s.queue_hold_ns = 0;

  for (int q : {0, 2}) {
    TrafficSource src;
    src.rate_pps = 320'000'000;
    src.priority = q;
    s.sources.push_back(src);
  }

  s.seed = seed;
  s.sim_duration = duration;
  s.record_mask = mask_of({TraceEventKind::Completion, TraceEventKind::Egress});
  return s;
}

Scenario slice_bound_scenario(std::uint64_t seed, Ps duration) {
  Scenario s;
  s.name = "slice-bound";
  // 8 x 1998 ns = 15984 ns, a multiple of the 72 ns batch cadence, so the
  // control slot offsets repeat identically every cycle.
  s.tgcl = make_round_robin_tgcl(1'998);
  s.gsi_ns = 9;
  s.gsi_mode = GsiMode::ShrinkEntries;
  s.tg_model = point_mass(0);
  s.control_model = point_mass(9);
  s.queue_model = default_queue_model();
  s.queue_hold_ns = 1'998;

  for (int q = 0; q < kNumQueues; ++q) {
    TrafficSource src;
    src.rate_pps = 85'000'000;
    src.priority = q;
    s.sources.push_back(src);
  }
  s.queue_depth = 2048;

  s.seed = seed;
  s.sim_duration = duration;
  s.record_mask = mask_of({TraceEventKind::Completion, TraceEventKind::Egress});
  return s;
}

std::vector<std::string> scenario_preset_names() {
  return {"paper_tgcl_400us", "paper_tgcl_400us_nogsi", "queue_delay", "tg_accuracy",
          "control_delay", "scripted_boundary", "slice_bound"};
}

Scenario scenario_preset(const std::string& name) {
  if (name == "paper_tgcl_400us") return testbed_scenario(30, 1, 100 * kMs);
  if (name == "paper_tgcl_400us_nogsi") return testbed_scenario(0, 1, 100 * kMs);
  if (name == "queue_delay") return queue_delay_scenario(1, 400 * kMs);
  if (name == "tg_accuracy") return tg_accuracy_scenario(1, 100 * kMs);
  if (name == "control_delay") return control_delay_scenario(1, 2 * kMs);
  if (name == "scripted_boundary") return scripted_boundary_scenario(1, 100 * kMs);
  if (name == "slice_bound") return slice_bound_scenario(1, 100 * kMs);
  throw EngineError("unknown scenario preset: " + name);
}

std::optional<long> reference_row_count(const Scenario& s) {
  if (s.gsi_ns != 30 || s.tgcl.entries.size() != 8) return std::nullopt;
  for (const GclEntry& e : s.tgcl.entries)
    if (e.duration_ns != 50'000) return std::nullopt;
  return 1'512;
}

// ---- reproduction experiments ----------------------------------------------

namespace {

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name);
  out << content;
}

void write_series_csv(const std::string& dir, const std::string& name, const DelaySeries& s) {
  if (dir.empty()) return;
  std::string csv = "index,value_ns\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    csv += std::to_string(i);
    csv += ',';
    csv += format_time_ns(s.values[i]);
    csv += '\n';
  }
  write_file(dir, name, csv);
}

struct SliceRunOutput {
  SliceResult slice;
  std::vector<OverlapInterval> overlaps;
  RunStats stats;
};

// Streams egress arrivals straight into the slice accumulator and overlap
// detector so the 100 ms testbed runs never materialize a trace.
class SliceSink : public TraceSink {
 public:
  SliceSink(SliceAccumulator& acc, OverlapDetector& det) : acc_(acc), det_(det) {}
  void on_event(const TraceEvent& e) override {
    if (e.kind == TraceEventKind::Egress) {
      acc_.on_egress(e.time, e.priority);
      det_.on_egress(e.time, e.priority);
    } else if (e.kind == TraceEventKind::Completion && e.stream == 0) {
      det_.on_completion(e.time);
    }
  }

 private:
  SliceAccumulator& acc_;
  OverlapDetector& det_;
};

SliceRunOutput run_slice_experiment(const Scenario& scenario, Ns reference_ns) {
  const Gcl schedule = effective_tgcl(scenario);
  SliceAccumulator acc(SliceOptions{reference_ns, 2, schedule.period_ns});
  OverlapDetector det(schedule);
  SliceSink sink(acc, det);
  SliceRunOutput out;
  out.stats = run_with_sink(scenario, sink);
  out.slice = acc.finish();
  out.overlaps = det.finish();
  return out;
}

int repro_tg(const ReproOptions& o, std::ostream& log) {
  const Ps dur = o.full ? 6'400 * kMs : 100 * kMs;  // full run covers 16k periods
  const Scenario s = tg_accuracy_scenario(o.seed, dur);
  const RunResult r = run_full(s);
  const DelaySeries series = measure_tg(r.trace);
  const SeriesSummary sum = series.summary();
  log << summary_line("delta_tg", sum) << "\n";
  write_series_csv(o.out_dir, "delta_tg.csv", series);
  if (!series.values.empty())
    write_file(o.out_dir, "delta_tg_hist.csv",
               emit_distribution(series, DistributionFormat::Histogram, 1));
  const bool ok = sum.count >= 2 && sum.min >= ns_to_ps(-11) && sum.max <= ns_to_ps(11);
  log << "check: deviation within [-11, 11] ns: " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? 0 : 1;
}

int repro_queue(const ReproOptions& o, std::ostream& log) {
  const Ps dur = o.full ? 60'000 * kMs : 400 * kMs;
  const Scenario s = queue_delay_scenario(o.seed, dur);
  const RunResult r = run_full(s);
  const DelaySeries series = measure_queue_delay(r.trace);
  const SeriesSummary sum = series.summary();
  log << summary_line("delta_queue", sum) << "\n";
  write_series_csv(o.out_dir, "delta_queue.csv", series);
  if (!series.values.empty())
    write_file(o.out_dir, "delta_queue_ccdf.csv",
               emit_distribution(series, DistributionFormat::Ccdf, 1));
  const double mean_ns = sum.mean / 1000.0;
  const bool ok = sum.count > 100 && sum.min >= ns_to_ps(1) && sum.max <= ns_to_ps(63) &&
                  mean_ns >= 13.63 && mean_ns <= 15.63;
  log << "check: values in [1, 63] ns and mean within 14.63 +/- 1 ns: "
      << (ok ? "ok" : "FAILED") << "\n";
  return ok ? 0 : 1;
}

int repro_control(const ReproOptions& o, std::ostream& log) {
  const Ps dur = o.full ? 10 * kMs : 2 * kMs;
  const Scenario s = control_delay_scenario(o.seed, dur);
  const RunResult r = run_full(s);
  const DelaySeries series = measure_control_delay(r.trace);
  const SeriesSummary sum = series.summary();
  log << summary_line("delta_control", sum) << "\n";
  write_series_csv(o.out_dir, "delta_control.csv", series);
  if (!series.values.empty())
    write_file(o.out_dir, "delta_control_hist.csv",
               emit_distribution(series, DistributionFormat::Histogram, 1));
  const bool ok = sum.count > 1000 && sum.median == ns_to_ps(9) && sum.max <= ns_to_ps(12);
  log << "check: median 9 ns, max <= 12 ns: " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? 0 : 1;
}

void log_slice_report(const SliceRunOutput& out, std::ostream& log, const std::string& dir) {
  const DelaySeries all = out.slice.combined();
  log << summary_line("delta_slice", all.summary()) << "\n";
  for (const auto& [prio, series] : out.slice.per_priority)
    log << "  " << summary_line(series.name, series.summary()) << "\n";
  log << "runs=" << out.slice.run_values.size()
      << " short_runs_skipped=" << out.slice.short_runs_skipped
      << " overlap_flags=" << out.slice.overlap_flags
      << " overlap_windows=" << out.overlaps.size() << "\n";
  if (!all.values.empty()) {
    const BimodalityResult bi = bimodality_check(all);
    log << "bimodality: " << (bi.bimodal ? "two modes" : "not detected");
    if (bi.bimodal)
      log << " (negative mode ~" << bi.negative_mode_ns << " ns, positive mode ~"
          << bi.positive_mode_ns << " ns, valley ~" << bi.valley_ns << " ns)";
    log << "\n";
    write_file(dir, "delta_slice_hist.csv",
               emit_distribution(all, DistributionFormat::Histogram, 3));
  }
  const CycleSums cycles = per_cycle_sums(out.slice, 0, 8);
  if (!cycles.sums.empty()) {
    Ps worst = 0;
    for (Ps v : cycles.sums) worst = std::max(worst, std::abs(v));
    log << "per-cycle deviation sum: cycles=" << cycles.sums.size()
        << " max|sum|=" << format_time_ns(worst) << " ns\n";
  }
}

int repro_slice(const ReproOptions& o, std::ostream& log, Ns gsi_ns) {
  const Ps dur = o.full ? 60'000 * kMs : 100 * kMs;
  if (o.full)
    log << "note: full duration simulates 60 s of saturated traffic; expect a very long run\n";
  const Scenario s = testbed_scenario(gsi_ns, o.seed, dur);
  const Ns reference = gsi_ns > 0 ? 50'000 - gsi_ns : 50'000;
  log << "scenario: " << s.name << ", reference entry duration " << reference << " ns\n";
  const SliceRunOutput out = run_slice_experiment(s, reference);
  log_slice_report(out, log, o.out_dir);
  if (gsi_ns > 0) {
    const bool ok = out.overlaps.empty();
    log << "check: no transmission overlap with " << gsi_ns << " ns switching intervals: "
        << (ok ? "ok" : "FAILED") << "\n";
    return ok ? 0 : 1;
  }
  log << "note: without switching intervals, entry boundaries overlap and the statistics above "
         "are not meaningful\n";
  return 0;
}

int repro_overlap(const ReproOptions& o, std::ostream& log) {
  const Ps dur = o.full ? 60'000 * kMs : 100 * kMs;
  if (o.full)
    log << "note: full duration simulates 60 s of saturated traffic per run; expect a very long run\n";
  constexpr int kSeeds = 5;

  struct Job {
    std::uint64_t seed;
    Ns gsi;
    std::size_t overlaps = 0;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < kSeeds; ++i) {
    jobs.push_back({o.seed + static_cast<std::uint64_t>(i), 0});
    jobs.push_back({o.seed + static_cast<std::uint64_t>(i), 30});
  }

  const int threads = std::max(1, o.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      Job& job = jobs[i];
      const Scenario s = testbed_scenario(job.gsi, job.seed, dur);
      const Gcl schedule = effective_tgcl(s);
      SliceAccumulator acc(SliceOptions{50'000 - job.gsi, 2, schedule.period_ns});
      OverlapDetector det(schedule);
      SliceSink sink(acc, det);
      run_with_sink(s, sink);
      job.overlaps = det.finish().size();
    }
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  } else {
    worker();
  }

  bool all_nogsi_positive = true, all_gsi_zero = true;
  log << "seed,gsi_ns,overlap_windows\n";
  for (const Job& j : jobs) {
    log << j.seed << "," << j.gsi << "," << j.overlaps << "\n";
    if (j.gsi == 0 && j.overlaps == 0) all_nogsi_positive = false;
    if (j.gsi == 30 && j.overlaps != 0) all_gsi_zero = false;
  }
  log << "check: overlaps occur without switching intervals: "
      << (all_nogsi_positive ? "ok" : "FAILED") << "\n";
  log << "check: 30 ns switching intervals eliminate overlap: "
      << (all_gsi_zero ? "ok" : "FAILED") << "\n";
  return (all_nogsi_positive && all_gsi_zero) ? 0 : 1;
}

int repro_scalability(const ReproOptions& o, std::ostream& log) {
  int rc = 0;
  for (const GsiMode mode : {GsiMode::ShrinkEntries, GsiMode::ExtendPeriod}) {
    Scenario s = testbed_scenario(30, 1, kMs);
    s.gsi_mode = mode;
    const Gcl gcl = effective_tgcl(s);
    const MatTable mat = compile_tgcl(gcl);
    const char* mode_name = mode == GsiMode::ShrinkEntries ? "shrink-entries" : "extend-period";
    log << "tGCL compile (" << mode_name << "): entries=" << mat.size()
        << " reference=1512 delta=" << (static_cast<long>(mat.size()) - 1512) << "\n";
    write_file(o.out_dir, std::string("tgcl_mat_") + mode_name + ".csv",
               mat_to_csv(mat, gcl.entries.size(), true));
  }
  log << "note: the reference count depends on how the switching intervals were encoded\n"
         "      (insertion mode, whether the wrap interval is explicit, and closed-queue\n"
         "      rows); both insertion modes are reported above so the delta is documented\n"
         "      rather than hidden.\n";

  // capacity limits
  struct Probe {
    const char* what;
    std::size_t capacity;
  };
  for (const Probe p : {Probe{"tGCL", kTgclCapacity}, Probe{"sGCL", kSgclCapacity},
                        Probe{"stream", kStreamTableCapacity}}) {
    MatTable at_cap(p.what, p.capacity, 16);
    bool filled_ok = true;
    try {
      for (std::size_t i = 0; i < p.capacity; ++i) at_cap.add(TernaryEntry{});
    } catch (const CapacityError&) {
      filled_ok = false;
    }
    bool rejected = false;
    try {
      at_cap.add(TernaryEntry{});
    } catch (const CapacityError&) {
      rejected = true;
    }
    log << p.what << ": " << p.capacity << " entries ok=" << (filled_ok ? "yes" : "NO")
        << ", entry " << (p.capacity + 1) << " rejected=" << (rejected ? "yes" : "NO") << "\n";
    if (!filled_ok || !rejected) rc = 1;
  }
  log << "distinct GCL periods supported: " << kMaxDistinctPeriods << "\n";
  return rc;
}

}  // namespace

std::vector<std::string> repro_names() {
  return {"tg-accuracy", "queue-delay", "control-delay", "slice-gsi",
          "slice-nogsi", "overlap",     "scalability"};
}

int run_repro(const std::string& name, const ReproOptions& opts, std::ostream& log) {
  if (name == "tg-accuracy") return repro_tg(opts, log);
  if (name == "queue-delay") return repro_queue(opts, log);
  if (name == "control-delay") return repro_control(opts, log);
  if (name == "slice-gsi") return repro_slice(opts, log, 30);
  if (name == "slice-nogsi") return repro_slice(opts, log, 0);
  if (name == "overlap") return repro_overlap(opts, log);
  if (name == "scalability") return repro_scalability(opts, log);
  throw EngineError("unknown experiment: " + name);
}

}  // namespace tassim
