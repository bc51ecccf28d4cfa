#include "tassim/schedule.hpp"

#include <stdexcept>

namespace tassim {

ValidationReport validate_gcl(const Gcl& gcl) {
  ValidationReport report;
  if (gcl.entries.empty()) {
    report.violations.push_back("entry list is empty");
    return report;
  }
  Ns sum = 0;
  for (std::size_t i = 0; i < gcl.entries.size(); ++i) {
    const GclEntry& e = gcl.entries[i];
    if (e.duration_ns <= 0)
      report.violations.push_back("entry " + std::to_string(i) + " has non-positive duration");
    if (e.is_gsi) {
      if (gcl.kind != GclKind::Transmission)
        report.violations.push_back("entry " + std::to_string(i) + " is a GSI in a stream GCL");
      else if (e.gates != GateVector::all_closed())
        report.violations.push_back("entry " + std::to_string(i) + " is a GSI with open gates");
    }
    sum += e.duration_ns;
  }
  if (sum != gcl.period_ns)
    report.violations.push_back("period " + std::to_string(gcl.period_ns) +
                                " != sum of entry durations " + std::to_string(sum));
  return report;
}

Gcl insert_gsis(const Gcl& gcl, Ns gsi_ns, GsiMode mode) {
  if (gcl.kind != GclKind::Transmission)
    throw ScheduleError("GSIs apply to transmission GCLs only");
  if (gsi_ns < 0) throw ScheduleError("negative GSI duration");
  if (gsi_ns == 0) return gcl;

  Gcl out = gcl;
  out.entries.clear();
  for (const GclEntry& e : gcl.entries) {
    GclEntry data = e;
    if (mode == GsiMode::ShrinkEntries) {
      if (e.duration_ns <= gsi_ns)
        throw ScheduleError("schedule infeasible: entry duration " +
                            std::to_string(e.duration_ns) + " ns <= GSI " +
                            std::to_string(gsi_ns) + " ns");
      data.duration_ns = e.duration_ns - gsi_ns;
    }
    out.entries.push_back(data);

    GclEntry gsi;
    gsi.duration_ns = gsi_ns;
    gsi.gates = GateVector::all_closed();
    gsi.is_gsi = true;
    out.entries.push_back(gsi);
  }
  if (mode == GsiMode::ExtendPeriod)
    out.period_ns = gcl.period_ns + static_cast<Ns>(gcl.entries.size()) * gsi_ns;
  return out;
}

Gcl strip_gsis(const Gcl& gcl, Ns gsi_ns, GsiMode mode) {
  Gcl out = gcl;
  out.entries.clear();
  Ns removed = 0;
  for (const GclEntry& e : gcl.entries) {
    if (e.is_gsi) {
      removed += e.duration_ns;
      continue;
    }
    GclEntry data = e;
    if (mode == GsiMode::ShrinkEntries) data.duration_ns += gsi_ns;
    out.entries.push_back(data);
  }
  if (mode == GsiMode::ExtendPeriod) out.period_ns = gcl.period_ns - removed;
  return out;
}

std::pair<std::size_t, const GclEntry*> entry_at(const Gcl& gcl, Ns rel_ns) {
  if (rel_ns < 0) throw ScheduleError("negative relative time");
  if (gcl.entries.empty()) throw ScheduleError("empty GCL");
  Ns start = 0;
  for (std::size_t i = 0; i < gcl.entries.size(); ++i) {
    const Ns end = start + gcl.entries[i].duration_ns;
    if (rel_ns < end) return {i, &gcl.entries[i]};
    start = end;
  }
  // rel >= period: clamp to the final entry
  return {gcl.entries.size() - 1, &gcl.entries.back()};
}

Ns entry_start(const Gcl& gcl, std::size_t index) {
  Ns start = 0;
  for (std::size_t i = 0; i < index && i < gcl.entries.size(); ++i)
    start += gcl.entries[i].duration_ns;
  return start;
}

Gcl make_round_robin_tgcl(Ns entry_ns, std::uint32_t port, int num_entries) {
  Gcl gcl;
  gcl.kind = GclKind::Transmission;
  gcl.port = port;
  for (int i = 0; i < num_entries; ++i) {
    GclEntry e;
    e.duration_ns = entry_ns;
    e.gates = GateVector::only(i % kNumQueues);
    gcl.entries.push_back(e);
  }
  gcl.period_ns = entry_ns * num_entries;
  return gcl;
}

}  // namespace tassim
