#include "tassim/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tassim {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

Ns get_ns(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  if (!obj[key].is_number_integer())
    throw ConfigError("'" + key + "' in " + where + " must be an integer nanosecond count");
  return obj[key].get<Ns>();
}

std::uint64_t parse_mac(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    return std::stoull(s, nullptr, 0);
  }
  throw ConfigError("bad MAC value in " + where);
}

DelayModel parse_delay(const json& obj, const std::string& slot) {
  std::set<std::string> allowed = {"kind", "ns", "lo_ns", "hi_ns", "points", "sequence"};
  if (slot == "queue") allowed.insert("hold_ns");
  check_keys(obj, allowed, "delays." + slot);
  if (!obj.contains("kind")) throw ConfigError("delays." + slot + " missing 'kind'");
  const std::string kind = obj["kind"].get<std::string>();
  if (kind == "constant") return DelayModel::make_constant(get_ns(obj, "ns", "delays." + slot));
  if (kind == "uniform")
    return DelayModel::make_uniform(get_ns(obj, "lo_ns", "delays." + slot),
                                    get_ns(obj, "hi_ns", "delays." + slot));
  if (kind == "empirical") {
    if (!obj.contains("points")) throw ConfigError("delays." + slot + " missing 'points'");
    std::vector<std::pair<Ns, double>> pts;
    for (const auto& p : obj["points"]) {
      if (!p.is_array() || p.size() != 2)
        throw ConfigError("delays." + slot + " points must be [value_ns, probability] pairs");
      pts.emplace_back(p[0].get<Ns>(), p[1].get<double>());
    }
    return DelayModel::make_empirical(std::move(pts));
  }
  if (kind == "scripted") {
    if (!obj.contains("sequence")) throw ConfigError("delays." + slot + " missing 'sequence'");
    std::vector<Ns> seq;
    for (const auto& v : obj["sequence"]) seq.push_back(v.get<Ns>());
    return DelayModel::make_scripted(std::move(seq));
  }
  if (kind == "default") {
    if (slot == "tg") return default_tg_model();
    if (slot == "queue") return default_queue_model();
    if (slot == "control") return default_control_model();
  }
  throw ConfigError("delays." + slot + ": unknown kind '" + kind + "'");
}

GateVector parse_gates(const json& entry, const std::string& where) {
  if (entry.contains("queue")) {
    const int q = entry["queue"].get<int>();
    if (q < 0 || q > 7) throw ConfigError("queue out of range in " + where);
    return GateVector::only(q);
  }
  if (entry.contains("open_queues")) {
    GateVector v;
    for (const auto& q : entry["open_queues"]) {
      const int qi = q.get<int>();
      if (qi < 0 || qi > 7) throw ConfigError("queue out of range in " + where);
      v.set(qi, true);
    }
    return v;
  }
  throw ConfigError(where + " needs 'queue' or 'open_queues'");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  check_keys(root,
             {"name", "schedule", "sgcls", "delays", "traffic", "link", "capacities", "sim",
              "streams", "queue_depth", "key_width", "best_effort_on_translate_miss"},
             origin);

  Scenario s;
  if (root.contains("name")) s.name = root["name"].get<std::string>();

  if (!root.contains("schedule")) throw ConfigError(origin + ": missing 'schedule'");
  const json& sched = root["schedule"];
  check_keys(sched, {"period_ns", "port", "entries", "gsi"}, "schedule");
  s.tgcl.kind = GclKind::Transmission;
  s.tgcl.period_ns = get_ns(sched, "period_ns", "schedule");
  if (sched.contains("port")) s.tgcl.port = sched["port"].get<std::uint32_t>();
  if (!sched.contains("entries")) throw ConfigError("schedule missing 'entries'");
  for (const json& je : sched["entries"]) {
    check_keys(je, {"duration_ns", "queue", "open_queues"}, "schedule.entries[]");
    GclEntry e;
    e.duration_ns = get_ns(je, "duration_ns", "schedule.entries[]");
    e.gates = parse_gates(je, "schedule.entries[]");
    s.tgcl.entries.push_back(e);
  }
  if (sched.contains("gsi")) {
    const json& g = sched["gsi"];
    check_keys(g, {"duration_ns", "mode"}, "schedule.gsi");
    s.gsi_ns = get_ns(g, "duration_ns", "schedule.gsi");
    if (g.contains("mode")) {
      const std::string m = g["mode"].get<std::string>();
      if (m == "extend-period") s.gsi_mode = GsiMode::ExtendPeriod;
      else if (m == "shrink-entries") s.gsi_mode = GsiMode::ShrinkEntries;
      else throw ConfigError("schedule.gsi.mode must be extend-period or shrink-entries");
    }
  }

  if (root.contains("sgcls")) {
    for (const json& jg : root["sgcls"]) {
      check_keys(jg, {"gate_id", "period_ns", "entries"}, "sgcls[]");
      SgclConfig cfg;
      cfg.gcl.kind = GclKind::Stream;
      cfg.gcl.gate_id = jg.at("gate_id").get<std::uint32_t>();
      cfg.gcl.period_ns = get_ns(jg, "period_ns", "sgcls[]");
      for (const json& je : jg.at("entries")) {
        check_keys(je, {"duration_ns", "open"}, "sgcls[].entries[]");
        GclEntry e;
        e.duration_ns = get_ns(je, "duration_ns", "sgcls[].entries[]");
        e.stream_open = je.at("open").get<bool>();
        cfg.gcl.entries.push_back(e);
      }
      s.sgcls.push_back(std::move(cfg));
    }
  }

  if (root.contains("delays")) {
    const json& d = root["delays"];
    check_keys(d, {"tg", "queue", "control"}, "delays");
    if (d.contains("tg")) s.tg_model = parse_delay(d["tg"], "tg");
    if (d.contains("queue")) {
      s.queue_model = parse_delay(d["queue"], "queue");
      if (d["queue"].contains("hold_ns")) s.queue_hold_ns = get_ns(d["queue"], "hold_ns", "delays.queue");
    }
    if (d.contains("control")) s.control_model = parse_delay(d["control"], "control");
  }

  if (root.contains("traffic")) {
    for (const json& jt : root["traffic"]) {
      check_keys(jt,
                 {"rate_pps", "frame_bytes", "priority", "mpls", "s_label_base", "eth_dst",
                  "start_ns", "duration_ns"},
                 "traffic[]");
      TrafficSource src;
      src.rate_pps = jt.at("rate_pps").get<std::uint64_t>();
      if (jt.contains("frame_bytes")) src.frame_bytes = jt["frame_bytes"].get<std::uint32_t>();
      if (jt.contains("priority")) {
        if (jt["priority"].is_string()) {
          if (jt["priority"].get<std::string>() != "uniform")
            throw ConfigError("traffic priority must be 0..7 or \"uniform\"");
          src.priority = -1;
        } else {
          src.priority = jt["priority"].get<int>();
        }
      }
      if (jt.contains("mpls")) src.mpls = jt["mpls"].get<bool>();
      if (jt.contains("s_label_base")) src.s_label_base = jt["s_label_base"].get<std::uint32_t>();
      if (jt.contains("eth_dst")) src.eth_dst = parse_mac(jt["eth_dst"], "traffic[]");
      if (jt.contains("start_ns")) src.start = ns_to_ps(get_ns(jt, "start_ns", "traffic[]"));
      if (jt.contains("duration_ns")) src.duration = ns_to_ps(get_ns(jt, "duration_ns", "traffic[]"));
      s.sources.push_back(src);
    }
  }

  if (root.contains("link")) {
    const json& l = root["link"];
    check_keys(l, {"rate_bps", "rate_gbps"}, "link");
    if (l.contains("rate_bps")) s.link_bps = l["rate_bps"].get<std::uint64_t>();
    else if (l.contains("rate_gbps")) s.link_bps = l["rate_gbps"].get<std::uint64_t>() * 1'000'000'000ull;
  }

  if (root.contains("capacities")) {
    const json& c = root["capacities"];
    check_keys(c, {"tgcl", "sgcl", "stream"}, "capacities");
    if (c.contains("tgcl")) s.tgcl_capacity = c["tgcl"].get<std::size_t>();
    if (c.contains("sgcl")) s.sgcl_capacity = c["sgcl"].get<std::size_t>();
    if (c.contains("stream")) s.stream_capacity = c["stream"].get<std::size_t>();
  }

  if (!root.contains("sim")) throw ConfigError(origin + ": missing 'sim'");
  const json& sim = root["sim"];
  check_keys(sim, {"seed", "duration_ns", "record"}, "sim");
  if (sim.contains("seed")) s.seed = sim["seed"].get<std::uint64_t>();
  s.sim_duration = ns_to_ps(get_ns(sim, "duration_ns", "sim"));
  if (sim.contains("record")) {
    s.record_mask = 0;
    for (const auto& r : sim["record"]) {
      TraceEventKind k;
      if (!trace_kind_from_string(r.get<std::string>(), k))
        throw ConfigError("sim.record: unknown event class '" + r.get<std::string>() + "'");
      s.record_mask |= record_bit(k);
    }
  }

  if (root.contains("streams")) {
    for (const json& js : root["streams"]) {
      check_keys(js, {"match", "action"}, "streams[]");
      StreamTableEntry e;
      const json& m = js.at("match");
      check_keys(m, {"s_label", "eth_dst", "vlan_id", "ipv4_src", "ipv4_dst"}, "streams[].match");
      if (m.contains("s_label")) e.key.s_label = m["s_label"].get<std::uint32_t>();
      if (m.contains("eth_dst")) e.key.eth_dst = parse_mac(m["eth_dst"], "streams[].match");
      if (m.contains("vlan_id")) e.key.vlan_id = m["vlan_id"].get<std::uint32_t>();
      if (m.contains("ipv4_src")) e.key.ipv4_src = m["ipv4_src"].get<std::uint32_t>();
      if (m.contains("ipv4_dst")) e.key.ipv4_dst = m["ipv4_dst"].get<std::uint32_t>();
      const json& a = js.at("action");
      check_keys(a, {"type", "vlan_id", "priority", "stream", "sgcl"}, "streams[].action");
      const std::string type = a.at("type").get<std::string>();
      if (type == "translate") {
        e.action.kind = StreamActionKind::Translate;
        e.action.vlan_id = a.at("vlan_id").get<std::uint16_t>();
        e.action.priority = a.at("priority").get<std::uint8_t>();
      } else if (type == "identify") {
        e.action.kind = StreamActionKind::Identify;
        e.action.stream_handle = a.at("stream").get<std::uint32_t>();
        if (a.contains("sgcl")) e.action.sgcl_id = a["sgcl"].get<std::uint32_t>();
        e.action.priority = a.at("priority").get<std::uint8_t>();
      } else {
        throw ConfigError("streams[].action.type must be translate or identify");
      }
      s.stream_entries.push_back(e);
    }
  }

  if (root.contains("queue_depth")) s.queue_depth = root["queue_depth"].get<std::size_t>();
  if (root.contains("key_width")) s.key_width = root["key_width"].get<int>();
  if (root.contains("best_effort_on_translate_miss"))
    s.best_effort_on_translate_miss = root["best_effort_on_translate_miss"].get<bool>();

  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

namespace {

json delay_to_json(const DelayModel& m, Ns hold_ns) {
  json j;
  switch (m.kind) {
    case DelayKind::Constant:
      j["kind"] = "constant";
      j["ns"] = m.constant;
      break;
    case DelayKind::Uniform:
      j["kind"] = "uniform";
      j["lo_ns"] = m.lo;
      j["hi_ns"] = m.hi;
      break;
    case DelayKind::Empirical: {
      j["kind"] = "empirical";
      json pts = json::array();
      for (const auto& [v, p] : m.points) pts.push_back(json::array({v, p}));
      j["points"] = pts;
      break;
    }
    case DelayKind::Scripted:
      j["kind"] = "scripted";
      j["sequence"] = m.sequence;
      break;
  }
  if (hold_ns > 0) j["hold_ns"] = hold_ns;
  return j;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["name"] = s.name;

  json sched;
  sched["period_ns"] = s.tgcl.period_ns;
  sched["port"] = s.tgcl.port;
  json entries = json::array();
  for (const GclEntry& e : s.tgcl.entries) {
    json je;
    je["duration_ns"] = e.duration_ns;
    json open = json::array();
    for (int q = 0; q < kNumQueues; ++q)
      if (e.gates.open(q)) open.push_back(q);
    if (open.size() == 1) je["queue"] = open[0];
    else je["open_queues"] = open;
    entries.push_back(je);
  }
  sched["entries"] = entries;
  if (s.gsi_ns > 0) {
    sched["gsi"] = {{"duration_ns", s.gsi_ns},
                    {"mode", s.gsi_mode == GsiMode::ShrinkEntries ? "shrink-entries"
                                                                  : "extend-period"}};
  }
  root["schedule"] = sched;

  if (!s.sgcls.empty()) {
    json sgcls = json::array();
    for (const SgclConfig& cfg : s.sgcls) {
      json jg;
      jg["gate_id"] = cfg.gcl.gate_id;
      jg["period_ns"] = cfg.gcl.period_ns;
      json ge = json::array();
      for (const GclEntry& e : cfg.gcl.entries)
        ge.push_back({{"duration_ns", e.duration_ns}, {"open", e.stream_open}});
      jg["entries"] = ge;
      sgcls.push_back(jg);
    }
    root["sgcls"] = sgcls;
  }

  root["delays"] = {{"tg", delay_to_json(s.tg_model, 0)},
                    {"queue", delay_to_json(s.queue_model, s.queue_hold_ns)},
                    {"control", delay_to_json(s.control_model, 0)}};

  if (!s.sources.empty()) {
    json traffic = json::array();
    for (const TrafficSource& src : s.sources) {
      json jt;
      jt["rate_pps"] = src.rate_pps;
      jt["frame_bytes"] = src.frame_bytes;
      if (src.priority < 0) jt["priority"] = "uniform";
      else jt["priority"] = src.priority;
      if (src.mpls) {
        jt["mpls"] = true;
        jt["s_label_base"] = src.s_label_base;
      }
      jt["eth_dst"] = src.eth_dst;
      if (src.start > 0) jt["start_ns"] = ps_to_ns(src.start);
      if (src.duration >= 0) jt["duration_ns"] = ps_to_ns(src.duration);
      traffic.push_back(jt);
    }
    root["traffic"] = traffic;
  }

  root["link"] = {{"rate_bps", s.link_bps}};
  root["capacities"] = {{"tgcl", s.tgcl_capacity}, {"sgcl", s.sgcl_capacity},
                        {"stream", s.stream_capacity}};

  json sim;
  sim["seed"] = s.seed;
  sim["duration_ns"] = ps_to_ns(s.sim_duration);
  if (s.record_mask != 0xffffffffu) {
    json rec = json::array();
    for (int k = 0; k <= static_cast<int>(TraceEventKind::Egress); ++k)
      if (s.record_mask & record_bit(static_cast<TraceEventKind>(k)))
        rec.push_back(to_string(static_cast<TraceEventKind>(k)));
    sim["record"] = rec;
  }
  root["sim"] = sim;

  if (!s.stream_entries.empty()) {
    json streams = json::array();
    for (const StreamTableEntry& e : s.stream_entries) {
      json js;
      json m;
      if (e.key.s_label != kWildcard) m["s_label"] = e.key.s_label;
      if (e.key.eth_dst != ~0ull) m["eth_dst"] = e.key.eth_dst;
      if (e.key.vlan_id != kWildcard) m["vlan_id"] = e.key.vlan_id;
      js["match"] = m;
      json a;
      if (e.action.kind == StreamActionKind::Translate) {
        a["type"] = "translate";
        a["vlan_id"] = e.action.vlan_id;
        a["priority"] = e.action.priority;
      } else {
        a["type"] = "identify";
        a["stream"] = e.action.stream_handle;
        if (e.action.sgcl_id != kWildcard) a["sgcl"] = e.action.sgcl_id;
        a["priority"] = e.action.priority;
      }
      js["action"] = a;
      streams.push_back(js);
    }
    root["streams"] = streams;
  }

  root["queue_depth"] = s.queue_depth;
  root["key_width"] = s.key_width;
  if (!s.best_effort_on_translate_miss) root["best_effort_on_translate_miss"] = false;

  return root.dump(2) + "\n";
}

}  // namespace tassim
