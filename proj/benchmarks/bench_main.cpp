#include <benchmark/benchmark.h>

#include "tassim/engine.hpp"
#include "tassim/presets.hpp"
#include "tassim/rng.hpp"
#include "tassim/tcam.hpp"

using namespace tassim;

namespace {

void RangeToPrefixes(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Rng rng(1);
  const std::uint64_t top = (1ull << width) - 1;
  for (auto _ : state) {
    const std::uint64_t a = rng.bounded(top + 1), b = rng.bounded(top + 1);
    auto prefixes = range_to_prefixes(std::min(a, b), std::max(a, b), width);
    benchmark::DoNotOptimize(prefixes);
  }
}
BENCHMARK(RangeToPrefixes)->Arg(16)->Arg(32)->Arg(48);

void TernaryMatchCompiled(benchmark::State& state) {
  Scenario t = testbed_scenario(30, 1, 1'000'000);
  const Gcl gcl = effective_tgcl(t);
  const MatTable mat = compile_tgcl(gcl);
  Rng rng(2);
  for (auto _ : state) {
    TernaryKey key;
    key.timestamp = rng.bounded(static_cast<std::uint64_t>(gcl.period_ns));
    key.queue = static_cast<std::uint32_t>(rng.bounded(8));
    auto hit = mat.match(key);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(TernaryMatchCompiled);

void TernaryMatchLinear(benchmark::State& state) {
  Scenario t = testbed_scenario(30, 1, 1'000'000);
  const Gcl gcl = effective_tgcl(t);
  const MatTable mat = compile_tgcl(gcl);
  Rng rng(2);
  for (auto _ : state) {
    TernaryKey key;
    key.timestamp = rng.bounded(static_cast<std::uint64_t>(gcl.period_ns));
    key.queue = static_cast<std::uint32_t>(rng.bounded(8));
    auto hit = mat.match_linear(key);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(TernaryMatchLinear);

// Whole-engine throughput over one millisecond of the saturated testbed.
void EngineTestbedMillisecond(benchmark::State& state) {
  std::uint64_t events = 0;
  for (auto _ : state) {
    Scenario s = testbed_scenario(30, 7, 1'000'000ll * 1'000);
    s.record_mask = 0;
    Trace unused;
    VectorSink sink(unused);
    const RunStats stats = run_with_sink(s, sink);
    events += stats.frames_generated + stats.frames_transmitted + stats.control_frames;
    benchmark::DoNotOptimize(stats);
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(EngineTestbedMillisecond)->Unit(benchmark::kMillisecond);

void CompileReferenceSchedule(benchmark::State& state) {
  Scenario t = testbed_scenario(30, 1, 1'000'000);
  const Gcl gcl = effective_tgcl(t);
  for (auto _ : state) {
    MatTable mat = compile_tgcl(gcl);
    benchmark::DoNotOptimize(mat);
  }
}
BENCHMARK(CompileReferenceSchedule);

}  // namespace

BENCHMARK_MAIN();
