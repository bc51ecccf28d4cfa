#include "tassim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tassim {

namespace {

Ps percentile_value(std::vector<Ps>& sorted, double q) {
  // midpoint convention so the median of an even-length series is the mean of
  // the middle pair
  const std::size_t n = sorted.size();
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, n - 1);
  if (lo == hi) return sorted[lo];
  const double frac = pos - static_cast<double>(lo);
  return static_cast<Ps>(std::llround(static_cast<double>(sorted[lo]) +
                                      frac * static_cast<double>(sorted[hi] - sorted[lo])));
}

}  // namespace

SeriesSummary DelaySeries::summary() const {
  SeriesSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<Ps> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  double sum = 0;
  for (Ps v : sorted) sum += static_cast<double>(v);
  s.mean = sum / static_cast<double>(sorted.size());
  s.median = percentile_value(sorted, 0.5);
  s.q1 = percentile_value(sorted, 0.25);
  s.q3 = percentile_value(sorted, 0.75);
  return s;
}

namespace {

std::string ns3(double ps) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << ps / 1000.0;
  return os.str();
}

}  // namespace

std::string summary_line(const std::string& name, const SeriesSummary& s) {
  std::ostringstream os;
  os << name << ": n=" << s.count;
  if (s.count > 0) {
    os << " min=" << ns3(static_cast<double>(s.min)) << " q1=" << ns3(static_cast<double>(s.q1))
       << " median=" << ns3(static_cast<double>(s.median))
       << " q3=" << ns3(static_cast<double>(s.q3))
       << " max=" << ns3(static_cast<double>(s.max)) << " mean=" << ns3(s.mean) << " (ns)";
  }
  return os.str();
}

DelaySeries measure_tg(const Trace& trace) {
  DelaySeries series;
  series.name = "tg";
  bool have_prev = false;
  Ps prev = 0;
  for (const TraceEvent& e : trace.events) {
    if (e.kind != TraceEventKind::Completion || e.stream != 0) continue;
    if (have_prev) series.values.push_back(e.time - prev - ns_to_ps(static_cast<Ns>(e.aux)));
    prev = e.time;
    have_prev = true;
  }
  return series;
}

DelaySeries measure_queue_delay(const Trace& trace) {
  DelaySeries series;
  series.name = "queue";
  std::map<int, Ps> open_write;  // queue -> pending write time
  for (const TraceEvent& e : trace.events) {
    if (e.kind == TraceEventKind::GateWrite) {
      if (e.aux == 1)
        open_write[e.queue] = e.time;
      else
        open_write.erase(e.queue);
    } else if (e.kind == TraceEventKind::Dequeue) {
      auto it = open_write.find(e.queue);
      if (it == open_write.end()) continue;
      // aux carries the frame generation time: only count openings where the
      // frame was already waiting when the change was written
      if (e.aux <= it->second) series.values.push_back(e.time - it->second);
      open_write.erase(it);
    }
  }
  return series;
}

DelaySeries measure_control_delay(const Trace& trace) {
  DelaySeries series;
  series.name = "control";
  bool have_prev = false;
  Ps prev = 0;
  for (const TraceEvent& e : trace.events) {
    if (e.kind != TraceEventKind::Ctrl) continue;
    if (have_prev) series.values.push_back(e.time - prev);
    prev = e.time;
    have_prev = true;
  }
  return series;
}

// ---- slice measurement ----------------------------------------------------

void SliceAccumulator::close_run() {
  if (!in_run_) return;
  if (run_count_ >= opts_.min_run) {
    const Ps d_hat = run_last_ - run_first_;
    const Ps deviation = d_hat - ns_to_ps(opts_.reference_ns);
    DelaySeries& series = result_.per_priority[run_prio_];
    if (series.name.empty()) series.name = "slice_prio" + std::to_string(run_prio_);
    series.values.push_back(deviation);
    result_.run_starts.push_back(run_first_);
    result_.run_priorities.push_back(run_prio_);
    result_.run_values.push_back(deviation);
  } else {
    ++result_.short_runs_skipped;
  }
  // a priority resuming within one period means its window was interrupted
  if (prev_prev_prio_ == run_prio_ && opts_.period_ns > 0 &&
      run_first_ - prev_run_end_ < ns_to_ps(opts_.period_ns) / 2)
    ++result_.overlap_flags;
  prev_prev_prio_ = prev_run_prio_;
  prev_run_prio_ = run_prio_;
  prev_run_end_ = run_last_;
  in_run_ = false;
}

void SliceAccumulator::on_egress(Ps time, int priority) {
  if (in_run_ && priority == run_prio_) {
    run_last_ = time;
    ++run_count_;
    return;
  }
  close_run();
  in_run_ = true;
  run_prio_ = priority;
  run_first_ = run_last_ = time;
  run_count_ = 1;
}

SliceResult SliceAccumulator::finish() {
  // The open run has no successor to mark its last frame, so it stays
  // unmeasured rather than fabricating a short duration.
  if (in_run_) ++result_.short_runs_skipped;
  in_run_ = false;
  return std::move(result_);
}

SliceResult measure_slice_deviation(const Trace& trace, Ns reference_ns, Ns period_ns) {
  SliceAccumulator acc(SliceOptions{reference_ns, 2, period_ns});
  for (const TraceEvent& e : trace.events)
    if (e.kind == TraceEventKind::Egress) acc.on_egress(e.time, e.priority);
  return acc.finish();
}

DelaySeries SliceResult::combined(const std::string& name) const {
  DelaySeries series;
  series.name = name;
  series.values = run_values;
  return series;
}

CycleSums per_cycle_sums(const SliceResult& result, int first_priority,
                         std::size_t runs_per_cycle) {
  CycleSums out;
  bool started = false;
  Ps sum = 0;
  std::size_t count = 0;
  bool first_group = true;
  for (std::size_t i = 0; i < result.run_values.size(); ++i) {
    if (result.run_priorities[i] == first_priority) {
      if (started) {
        if (count == runs_per_cycle)
          out.sums.push_back(sum);
        else if (!first_group)
          ++out.incomplete;
        first_group = false;
      }
      started = true;
      sum = 0;
      count = 0;
    }
    if (started) {
      sum += result.run_values[i];
      ++count;
    }
  }
  // the trailing partial group is discarded
  return out;
}

// ---- overlap detection ----------------------------------------------------

OverlapDetector::OverlapDetector(const Gcl& schedule) {
  period_ns_ = schedule.period_ns;
  // data windows, each extended through the GSI that follows it
  Ns start = 0;
  std::optional<Window> open_window;
  for (const GclEntry& e : schedule.entries) {
    if (!e.is_gsi) {
      if (open_window) windows_.push_back(*open_window);
      open_window = Window{start, start + e.duration_ns};
    } else if (open_window) {
      open_window->end += e.duration_ns;
    }
    start += e.duration_ns;
  }
  if (open_window) windows_.push_back(*open_window);
  if (windows_.empty()) throw std::runtime_error("schedule has no data entries");
}

std::size_t OverlapDetector::window_of(Ns rel) const {
  std::size_t lo = 0, hi = windows_.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (windows_[mid].start <= rel) lo = mid + 1; else hi = mid;
  }
  return lo == 0 ? 0 : std::min(lo - 1, windows_.size() - 1);
}

void OverlapDetector::on_completion(Ps time) {
  anchor_ = time;
  ++cycle_;
}

void OverlapDetector::close_window() {
  if (!have_window_) return;
  if (switches_ >= 2) {
    OverlapInterval o;
    o.begin = first_switch_time_;
    o.end = last_time_;
    o.priority_a = last_prio_;
    o.priority_b = first_other_;
    o.cycle = cur_cycle_;
    o.window = cur_window_;
    found_.push_back(o);
  }
  have_window_ = false;
  switches_ = 0;
  last_prio_ = -1;
  first_other_ = -1;
}

void OverlapDetector::on_egress(Ps time, int priority) {
  const Ns rel = std::min<Ns>(ps_to_ns(time - anchor_), period_ns_ - 1);
  const std::size_t w = window_of(rel);
  if (!have_window_ || w != cur_window_ || cycle_ != cur_cycle_) {
    close_window();
    have_window_ = true;
    cur_window_ = w;
    cur_cycle_ = cycle_;
    last_prio_ = priority;
    switches_ = 0;
  } else if (priority != last_prio_) {
    if (switches_ == 0) first_switch_time_ = time;
    if (first_other_ < 0) first_other_ = last_prio_;
    ++switches_;
    last_prio_ = priority;
  }
  last_time_ = time;
}

std::vector<OverlapInterval> OverlapDetector::finish() {
  close_window();
  return std::move(found_);
}

std::vector<OverlapInterval> detect_overlap(const Trace& trace, const Gcl& schedule) {
  OverlapDetector det(schedule);
  for (const TraceEvent& e : trace.events) {
    if (e.kind == TraceEventKind::Completion && e.stream == 0)
      det.on_completion(e.time);
    else if (e.kind == TraceEventKind::Egress)
      det.on_egress(e.time, e.priority);
  }
  return det.finish();
}

// ---- distributions ----------------------------------------------------------

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a / b - ((a % b != 0 && (a < 0) != (b < 0)) ? 1 : 0);
}

std::map<std::int64_t, std::size_t> binned(const DelaySeries& series, Ns bin_width_ns) {
  std::map<std::int64_t, std::size_t> bins;
  const Ps width = ns_to_ps(bin_width_ns);
  for (Ps v : series.values) ++bins[floor_div(v, width)];
  return bins;
}

}  // namespace

std::string emit_distribution(const DelaySeries& series, DistributionFormat format,
                              Ns bin_width_ns) {
  if (series.values.empty()) throw std::runtime_error("empty series");
  std::ostringstream os;
  if (format == DistributionFormat::Histogram) {
    if (bin_width_ns <= 0) throw std::runtime_error("bin width must be positive");
    os << "bin_start_ns,count,normalized\n";
    const auto bins = binned(series, bin_width_ns);
    const double total = static_cast<double>(series.values.size());
    os.setf(std::ios::fixed);
    for (const auto& [bin, count] : bins) {
      os.precision(3);
      os << static_cast<double>(bin * ns_to_ps(bin_width_ns)) / 1000.0 << ',' << count << ',';
      os.precision(9);
      os << static_cast<double>(count) / total << '\n';
    }
  } else {
    os << "value_ns,p_gt\n";
    std::vector<Ps> sorted = series.values;
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());
    os.setf(std::ios::fixed);
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      os.precision(3);
      os << static_cast<double>(sorted[i]) / 1000.0 << ',';
      os.precision(9);
      os << (total - static_cast<double>(j)) / total << '\n';
      i = j;
    }
  }
  return os.str();
}

double ccdf_at(const DelaySeries& series, Ps value) {
  if (series.values.empty()) return 0;
  std::size_t gt = 0;
  for (Ps v : series.values)
    if (v > value) ++gt;
  return static_cast<double>(gt) / static_cast<double>(series.values.size());
}

BimodalityResult bimodality_check(const DelaySeries& series, Ns bin_width_ns) {
  BimodalityResult result;
  if (series.values.empty()) return result;
  const auto bins = binned(series, bin_width_ns);
  if (bins.empty()) return result;

  const std::int64_t lo = bins.begin()->first;
  const std::int64_t hi = bins.rbegin()->first;
  std::vector<std::size_t> counts(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const auto& [bin, count] : bins) counts[static_cast<std::size_t>(bin - lo)] = count;

  auto count_at = [&](std::int64_t idx) -> std::size_t {
    if (idx < 0 || idx >= static_cast<std::int64_t>(counts.size())) return 0;
    return counts[static_cast<std::size_t>(idx)];
  };
  auto center_ns = [&](std::int64_t idx) {
    return (lo + idx) * bin_width_ns + bin_width_ns / 2;
  };

  std::vector<std::int64_t> maxima;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(counts.size()); ++i)
    if (count_at(i) > count_at(i - 1) && count_at(i) > count_at(i + 1)) maxima.push_back(i);

  // Among all negative/positive pairs separated by a deep-enough valley,
  // report the dominant one.
  std::size_t best_mass = 0;
  for (std::size_t a = 0; a < maxima.size(); ++a) {
    for (std::size_t b = a + 1; b < maxima.size(); ++b) {
      const std::int64_t m1 = maxima[a], m2 = maxima[b];
      if (center_ns(m1) >= 0 || center_ns(m2) <= 0) continue;
      const std::size_t smaller = std::min(count_at(m1), count_at(m2));
      for (std::int64_t v = m1 + 1; v < m2; ++v) {
        if (static_cast<double>(count_at(v)) < 0.6 * static_cast<double>(smaller)) {
          const std::size_t mass = count_at(m1) + count_at(m2);
          if (mass > best_mass) {
            best_mass = mass;
            result.bimodal = true;
            result.negative_mode_ns = center_ns(m1);
            result.positive_mode_ns = center_ns(m2);
            result.valley_ns = center_ns(v);
          }
          break;
        }
      }
    }
  }
  return result;
}

}  // namespace tassim
