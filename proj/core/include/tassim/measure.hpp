#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tassim/schedule.hpp"
#include "tassim/trace.hpp"
#include "tassim/types.hpp"

namespace tassim {

struct SeriesSummary {
  std::size_t count = 0;
  Ps min = 0, max = 0;
  double mean = 0;
  Ps median = 0, q1 = 0, q3 = 0;
};

/// A named series of signed delays in picoseconds. The summary is always
/// recomputed from the values.
struct DelaySeries {
  std::string name;
  std::vector<Ps> values;  // picoseconds

  SeriesSummary summary() const;
};

std::string summary_line(const std::string& name, const SeriesSummary& s);

/// Gaps between consecutive period-completion frames of the tGCL reference
/// (generator 0) minus the configured period.
DelaySeries measure_tg(const Trace& trace);

/// Per gate opening with a waiting frame: first dequeue time minus the
/// AFC write time. Openings whose first dequeued frame arrived after the
/// write are skipped (the queue was empty, so the gap would measure traffic,
/// not hardware).
DelaySeries measure_queue_delay(const Trace& trace);

/// Inter-arrival gaps of consecutive TAS control frames.
DelaySeries measure_control_delay(const Trace& trace);

// ---- tGCL entry duration measurement (priority-change detection) ---------

struct SliceOptions {
  Ns reference_ns = 0;   // configured entry duration d to compare against
  std::size_t min_run = 2;  // runs shorter than this are skipped and counted
  Ns period_ns = 0;      // used to flag resumed-priority interleaves
};

struct SliceResult {
  // one series per priority (single-priority-per-entry schedules)
  std::map<int, DelaySeries> per_priority;
  std::vector<Ps> run_starts;       // t_first of every accepted run, in order
  std::vector<int> run_priorities;  // matching priorities
  std::vector<Ps> run_values;       // deviation of each accepted run, in order
  std::size_t short_runs_skipped = 0;
  std::size_t overlap_flags = 0;  // same priority resumed within one period

  DelaySeries combined(const std::string& name = "slice") const;
};

/// Sums the deviations of each full cycle: a cycle starts at every run of
/// `first_priority` and must contain exactly `runs_per_cycle` runs to count.
struct CycleSums {
  std::vector<Ps> sums;
  std::size_t incomplete = 0;  // interior groups with a wrong run count
};
CycleSums per_cycle_sums(const SliceResult& result, int first_priority,
                         std::size_t runs_per_cycle);

/// Streaming accumulator: feed egress arrivals in time order.
class SliceAccumulator {
 public:
  explicit SliceAccumulator(SliceOptions opts) : opts_(opts) {}

  void on_egress(Ps time, int priority);
  SliceResult finish();

 private:
  void close_run();

  SliceOptions opts_;
  SliceResult result_;
  bool in_run_ = false;
  int run_prio_ = -1;
  Ps run_first_ = 0, run_last_ = 0;
  std::size_t run_count_ = 0;
  int prev_run_prio_ = -1;
  int prev_prev_prio_ = -1;
  Ps prev_run_end_ = 0;
};

SliceResult measure_slice_deviation(const Trace& trace, Ns reference_ns, Ns period_ns = 0);

// ---- Overlap detection ----------------------------------------------------

struct OverlapInterval {
  Ps begin = 0, end = 0;
  int priority_a = -1, priority_b = -1;
  std::uint64_t cycle = 0;
  std::size_t window = 0;
};

/// Flags schedule windows whose egress arrivals alternate between priorities
/// (two or more priority switches inside one window). A single switch is the
/// normal boundary transition; alternation means frames of two entries were
/// transmitted simultaneously. Windows are the data entries of the schedule,
/// each extended through its following GSI; cycles are anchored at the
/// period-completion events of generator 0.
class OverlapDetector {
 public:
  explicit OverlapDetector(const Gcl& schedule);

  void on_completion(Ps time);
  void on_egress(Ps time, int priority);
  std::vector<OverlapInterval> finish();

 private:
  struct Window {
    Ns start = 0;  // relative
    Ns end = 0;
  };

  void close_window();
  std::size_t window_of(Ns rel) const;

  std::vector<Window> windows_;
  Ns period_ns_ = 0;
  Ps anchor_ = 0;  // last completion (cycle start)
  std::uint64_t cycle_ = 0;
  bool have_window_ = false;
  std::uint64_t cur_cycle_ = 0;
  std::size_t cur_window_ = 0;
  int last_prio_ = -1;
  int first_other_ = -1;
  std::size_t switches_ = 0;
  Ps first_switch_time_ = 0, last_time_ = 0;
  std::vector<OverlapInterval> found_;
};

std::vector<OverlapInterval> detect_overlap(const Trace& trace, const Gcl& schedule);

// ---- Distribution output --------------------------------------------------

enum class DistributionFormat { Histogram, Ccdf };

/// Histogram rows: bin_start_ns,count,normalized. CCDF rows: value_ns,p_gt;
/// monotone non-increasing, ending at zero.
std::string emit_distribution(const DelaySeries& series, DistributionFormat format,
                              Ns bin_width_ns);

/// P(X > value) over the series.
double ccdf_at(const DelaySeries& series, Ps value);

struct BimodalityResult {
  bool bimodal = false;
  Ns negative_mode_ns = 0;
  Ns positive_mode_ns = 0;
  Ns valley_ns = 0;
};

/// Histogram test on 3 ns bins: there must be a local maximum centered below
/// zero and one above zero with some bin between them below 60% of the
/// smaller maximum.
BimodalityResult bimodality_check(const DelaySeries& series, Ns bin_width_ns = 3);

}  // namespace tassim
