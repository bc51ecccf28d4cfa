#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tassim/engine.hpp"

namespace tassim {

// Scenario builders for the bundled experiments. Durations in simulated time.

/// The reference testbed: 400 us period split into eight 50 us single-queue
/// entries, 514 Mpps of 64 B MPLS traffic with uniform random priorities at
/// 400 Gb/s, DetNet translation and stream identification enabled.
Scenario testbed_scenario(Ns gsi_ns, std::uint64_t seed, Ps duration);

Scenario tg_accuracy_scenario(std::uint64_t seed, Ps duration);
Scenario queue_delay_scenario(std::uint64_t seed, Ps duration);
Scenario control_delay_scenario(std::uint64_t seed, Ps duration);

/// Saturated two-queue schedule with scripted queue delays and a batch-aligned
/// period, so every gate transition instant has a closed form.
Scenario scripted_boundary_scenario(std::uint64_t seed, Ps duration);

/// Saturated eight-queue schedule whose period is a multiple of the control
/// batch cadence; slice deviations then depend only on the queue-delay draws
/// and the fixed slot offsets.
Scenario slice_bound_scenario(std::uint64_t seed, Ps duration);

/// Scenario presets addressable from the CLI (`paper_tgcl_400us`, ...).
std::vector<std::string> scenario_preset_names();
Scenario scenario_preset(const std::string& name);

/// Published row count to compare a compiled schedule against, when the
/// scenario is the reference 400 us / 30 ns-interval configuration.
std::optional<long> reference_row_count(const Scenario& scenario);

struct ReproOptions {
  std::string out_dir;  // empty = print only
  std::uint64_t seed = 1;
  bool full = false;    // original experiment durations instead of desk scale
  int threads = 1;
};

std::vector<std::string> repro_names();

/// Runs one reproduction experiment, printing its report to `log` and writing
/// metric CSVs to out_dir when set. Returns 0 when the experiment's checks
/// hold, 1 otherwise.
int run_repro(const std::string& name, const ReproOptions& opts, std::ostream& log);

}  // namespace tassim
