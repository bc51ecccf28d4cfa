#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tassim/types.hpp"

namespace tassim {

enum class TraceEventKind : std::uint8_t {
  Completion,  // period-completion frame processed, reference updated
  Ctrl,        // TAS control frame arrival
  GateWrite,   // AFC value written (state change commanded)
  GateEffective,
  Arrival,     // data frame at ingress, post identification
  PsfpDrop,
  TailDrop,
  Dequeue,
  Egress,      // frame fully received at the measurement sink
};

const char* to_string(TraceEventKind k);
bool trace_kind_from_string(const std::string& s, TraceEventKind& out);

struct TraceEvent {
  Ps time = 0;
  TraceEventKind kind = TraceEventKind::Arrival;
  std::uint32_t port = 0;
  std::int16_t queue = -1;
  std::int16_t priority = -1;
  std::int64_t stream = -1;
  std::int64_t frame_id = -1;
  std::int64_t aux = 0;
};

struct Trace {
  std::vector<TraceEvent> events;  // time-ordered, append-only
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_event(const TraceEvent& event) = 0;
};

class VectorSink : public TraceSink {
 public:
  explicit VectorSink(Trace& trace) : trace_(trace) {}
  void on_event(const TraceEvent& event) override { trace_.events.push_back(event); }

 private:
  Trace& trace_;
};

class CsvSink : public TraceSink {
 public:
  explicit CsvSink(std::ostream& os);
  void on_event(const TraceEvent& event) override;

 private:
  std::ostream& os_;
};

// Exact wire format: header `time_ns,event,port,queue,priority,stream,frame_id,aux`,
// one row per event, time printed as nanoseconds with three fractional digits.
std::string format_time_ns(Ps ps);
void write_trace_csv(const Trace& trace, std::ostream& os);
Trace read_trace_csv(std::istream& is);

}  // namespace tassim
