#include "tassim/trace.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tassim {

namespace {

constexpr std::array<const char*, 9> kKindNames = {
    "completion", "ctrl", "gate_write", "gate_eff", "arrival",
    "psfp_drop",  "tail_drop", "deq",   "egress",
};

}  // namespace

const char* to_string(TraceEventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

bool trace_kind_from_string(const std::string& s, TraceEventKind& out) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (s == kKindNames[i]) {
      out = static_cast<TraceEventKind>(i);
      return true;
    }
  }
  return false;
}

std::string format_time_ns(Ps ps) {
  const Ps ns = ps / kPsPerNs;
  const Ps frac = ps % kPsPerNs;
  std::string out = std::to_string(ns);
  out += '.';
  out += static_cast<char>('0' + frac / 100);
  out += static_cast<char>('0' + (frac / 10) % 10);
  out += static_cast<char>('0' + frac % 10);
  return out;
}

namespace {

void write_row(const TraceEvent& e, std::ostream& os) {
  os << format_time_ns(e.time) << ',' << to_string(e.kind) << ',' << e.port << ','
     << e.queue << ',' << e.priority << ',' << e.stream << ',' << e.frame_id << ','
     << e.aux << '\n';
}

}  // namespace

CsvSink::CsvSink(std::ostream& os) : os_(os) {
  os_ << "time_ns,event,port,queue,priority,stream,frame_id,aux\n";
}

void CsvSink::on_event(const TraceEvent& event) { write_row(event, os_); }

void write_trace_csv(const Trace& trace, std::ostream& os) {
  os << "time_ns,event,port,queue,priority,stream,frame_id,aux\n";
  for (const TraceEvent& e : trace.events) write_row(e, os);
}

namespace {

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw std::runtime_error("bad integer in trace: " + s);
  return v;
}

Ps parse_time(const std::string& s) {
  const auto dot = s.find('.');
  if (dot == std::string::npos) return parse_int(s) * kPsPerNs;
  const std::int64_t ns = parse_int(s.substr(0, dot));
  std::string frac = s.substr(dot + 1);
  while (frac.size() < 3) frac += '0';
  return ns * kPsPerNs + parse_int(frac.substr(0, 3));
}

}  // namespace

Trace read_trace_csv(std::istream& is) {
  Trace trace;
  std::string line;
  if (!std::getline(is, line)) return trace;
  if (line.rfind("time_ns,", 0) != 0)
    throw std::runtime_error("not a trace CSV: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<std::string, 8> cols;
    std::size_t start = 0;
    for (std::size_t c = 0; c < 8; ++c) {
      const auto comma = line.find(',', start);
      if (comma == std::string::npos && c < 7)
        throw std::runtime_error("short trace row: " + line);
      cols[c] = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma + 1;
    }
    TraceEvent e;
    e.time = parse_time(cols[0]);
    if (!trace_kind_from_string(cols[1], e.kind))
      throw std::runtime_error("unknown trace event kind: " + cols[1]);
    e.port = static_cast<std::uint32_t>(parse_int(cols[2]));
    e.queue = static_cast<std::int16_t>(parse_int(cols[3]));
    e.priority = static_cast<std::int16_t>(parse_int(cols[4]));
    e.stream = parse_int(cols[5]);
    e.frame_id = parse_int(cols[6]);
    e.aux = parse_int(cols[7]);
    trace.events.push_back(e);
  }
  return trace;
}

}  // namespace tassim
