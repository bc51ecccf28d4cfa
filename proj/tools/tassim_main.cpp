#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tassim/engine.hpp"
#include "tassim/measure.hpp"
#include "tassim/presets.hpp"
#include "tassim/scenario_io.hpp"
#include "tassim/tcam.hpp"

namespace {

using namespace tassim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

Scenario load_or_preset(const std::string& path) {
  if (std::filesystem::exists(path)) return load_scenario(path);
  const auto names = scenario_preset_names();
  if (std::find(names.begin(), names.end(), path) != names.end()) return scenario_preset(path);
  throw ConfigError("no such scenario file or preset: " + path);
}

int cmd_validate(const std::string& path) {
  load_or_preset(path);  // throws on any violation
  return kExitOk;
}

int cmd_compile(const std::string& path, const std::string& out_dir) {
  const Scenario s = load_or_preset(path);
  const Gcl tgcl = effective_tgcl(s);
  const MatTable tmat = compile_tgcl(tgcl, s.key_width, s.tgcl_capacity);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/tgcl_mat.csv");
    out << mat_to_csv(tmat, tgcl.entries.size(), true);
  }
  std::cout << "tGCL: " << tmat.size() << " entries (capacity " << tmat.capacity() << ")\n";
  if (const auto reference = reference_row_count(s)) {
    std::cout << "reference count " << *reference << ", delta "
              << (static_cast<long>(tmat.size()) - *reference)
              << " (encoding-dependent: interval placement and closed-queue rows)\n";
  }
  for (const SgclConfig& cfg : s.sgcls) {
    const MatTable smat = compile_sgcl(cfg.gcl, s.key_width, s.sgcl_capacity);
    std::ofstream out(out_dir + "/sgcl_" + std::to_string(cfg.gcl.gate_id) + "_mat.csv");
    out << mat_to_csv(smat, cfg.gcl.entries.size(), false);
    std::cout << "sGCL " << cfg.gcl.gate_id << ": " << smat.size() << " entries (capacity "
              << smat.capacity() << ")\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& path, const std::string& out_dir, std::uint64_t seed_override,
                 bool seed_set) {
  Scenario s = load_or_preset(path);
  if (seed_set) s.seed = seed_override;
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/trace.csv");
  CsvSink sink(out);
  const RunStats stats = run_with_sink(s, sink);
  std::cout << "generated=" << stats.frames_generated << " transmitted=" << stats.frames_transmitted
            << " psfp_dropped=" << stats.psfp_dropped << " tail_dropped=" << stats.tail_dropped
            << " in_queue=" << stats.in_queue_at_end << " control_frames=" << stats.control_frames
            << " gate_changes=" << stats.gate_changes << "\n";
  std::cout << "trace: " << out_dir << "/trace.csv\n";
  return kExitOk;
}

int cmd_report(const std::string& trace_path, const std::string& scenario_path,
               const std::string& out_dir) {
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("cannot open trace: " + trace_path);
  const Trace trace = read_trace_csv(in);
  const Scenario s = load_or_preset(scenario_path);
  const Gcl schedule = effective_tgcl(s);

  std::filesystem::create_directories(out_dir);
  std::ostringstream summary;

  const DelaySeries tg = measure_tg(trace);
  const DelaySeries queue = measure_queue_delay(trace);
  const DelaySeries control = measure_control_delay(trace);

  Ns reference = schedule.entries.front().duration_ns;
  for (const GclEntry& e : schedule.entries)
    if (!e.is_gsi) { reference = e.duration_ns; break; }
  const SliceResult slice = measure_slice_deviation(trace, reference, schedule.period_ns);
  const auto overlaps = detect_overlap(trace, schedule);

  auto emit = [&](const DelaySeries& series, const std::string& file) {
    summary << summary_line(series.name, series.summary()) << "\n";
    if (series.values.empty()) return;
    std::ofstream out(out_dir + "/" + file);
    out << "index,value_ns\n";
    for (std::size_t i = 0; i < series.values.size(); ++i)
      out << i << ',' << format_time_ns(series.values[i]) << '\n';
  };
  emit(tg, "delta_tg.csv");
  emit(queue, "delta_queue.csv");
  emit(control, "delta_control.csv");
  const DelaySeries slice_all = slice.combined();
  emit(slice_all, "delta_slice.csv");
  if (!slice_all.values.empty()) {
    std::ofstream out(out_dir + "/delta_slice_hist.csv");
    out << emit_distribution(slice_all, DistributionFormat::Histogram, 3);
  }
  summary << "slice runs=" << slice.run_values.size()
          << " short_runs_skipped=" << slice.short_runs_skipped
          << " overlap_flags=" << slice.overlap_flags << "\n";
  summary << "overlap windows=" << overlaps.size() << "\n";

  std::ofstream sf(out_dir + "/summary.txt");
  sf << summary.str();
  std::cout << summary.str();
  return kExitOk;
}

int cmd_repro(const std::string& experiment, const ReproOptions& opts) {
  const auto names = repro_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    std::cerr << "unknown experiment: " << experiment << "\nknown:";
    for (const auto& n : names) std::cerr << ' ' << n;
    std::cerr << "\n";
    return kExitUsage;
  }
  return run_repro(experiment, opts, std::cout) == 0 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic time-aware shaper simulator and schedule compiler"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string scenario_path, trace_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool full = false;
  std::string format = "csv";

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", scenario_path, "scenario file or preset name")->required();

  auto* compile = app.add_subcommand("compile", "compile the GCL match tables to CSV");
  compile->add_option("scenario", scenario_path)->required();
  compile->add_option("-o,--out", out_dir, "output directory");

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write the trace CSV");
  simulate->add_option("scenario", scenario_path)->required();
  simulate->add_option("-o,--out", out_dir, "output directory");
  simulate->add_option("--seed", seed, "override the scenario seed")
      ->each([&](const std::string&) { seed_set = true; });
  simulate->add_option("--format", format, "output format (csv)");

  auto* report = app.add_subcommand("report", "recompute metrics from a trace");
  report->add_option("trace", trace_path, "trace CSV")->required();
  report->add_option("scenario", scenario_path, "scenario the trace came from")->required();
  report->add_option("-o,--out", out_dir, "output directory");

  auto* repro = app.add_subcommand("repro", "run a bundled experiment");
  std::string experiment;
  repro->add_option("experiment", experiment,
                    "one of: tg-accuracy queue-delay control-delay slice-gsi slice-nogsi "
                    "overlap scalability")
      ->required();
  repro->add_option("-o,--out", out_dir, "output directory for metric CSVs");
  repro->add_option("--seed", seed, "base seed")->each([&](const std::string&) { seed_set = true; });
  repro->add_flag("--full", full, "original experiment durations instead of desk scale");
  repro->add_option("--format", format, "output format (csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  if (format != "csv") {
    std::cerr << "unsupported format: " << format << "\n";
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(scenario_path);
    if (compile->parsed()) return cmd_compile(scenario_path, out_dir);
    if (simulate->parsed()) return cmd_simulate(scenario_path, out_dir, seed, seed_set);
    if (report->parsed()) return cmd_report(trace_path, scenario_path, out_dir);
    if (repro->parsed()) {
      ReproOptions opts;
      opts.out_dir = out_dir;
      if (seed_set) opts.seed = seed; else opts.seed = 1;
      opts.full = full;
      if (const char* env = std::getenv("TAS_SIM_THREADS")) opts.threads = std::atoi(env);
      return cmd_repro(experiment, opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ScheduleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EngineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
