// SPDX-License-Identifier: Apache-2.0

#include "mcfl/json_io.hpp"

#include "mcfl/error.hpp"

namespace mcfl {

namespace {

ViolationKind violation_from_name(const std::string& s) {
  if (s == "assertion") return ViolationKind::Assertion;
  if (s == "deadlock") return ViolationKind::Deadlock;
  if (s == "division-by-zero") return ViolationKind::DivisionByZero;
  throw Error("unknown violation kind '" + s + "'");
}

Json line_json(LineId l) { return l.valid() ? Json(l.value) : Json(nullptr); }
LineId line_of(const Json& j) { return j.is_null() ? LineId{} : LineId{j.get<int>()}; }

Json choices_json(const std::vector<std::pair<LineId, Value>>& cs) {
  Json a = Json::array();
  for (const auto& [line, v] : cs) a.push_back({{"line", line.value}, {"value", v}});
  return a;
}

std::vector<std::pair<LineId, Value>> choices_of(const Json& j) {
  std::vector<std::pair<LineId, Value>> out;
  for (const auto& c : j) out.emplace_back(LineId{c.at("line").get<int>()}, c.at("value").get<Value>());
  return out;
}

Json origin_json(const LineOrigin& o) {
  Json e;
  if (o.is_original()) {
    e["kind"] = "original";
    e["value"] = o.line.value;
  } else {
    e["kind"] = "synthetic";
    e["value"] = synthetic_name(o.kind);
    if (o.line.valid()) e["line"] = o.line.value;
  }
  return e;
}

}  // namespace

Json to_json(const Counterexample& cex) {
  Json steps = Json::array();
  for (const auto& s : cex.steps) {
    Json val = Json::object();
    for (const auto& [k, v] : s.valuation) val[k] = v;
    steps.push_back({{"step_index", s.step_index}, {"thread", s.thread}, {"line", s.line.value}, {"valuation", val}});
  }
  Json sw = Json::array();
  for (const auto& s : cex.switches)
    sw.push_back({{"switch_index", s.switch_index},
                  {"from_thread", s.from_thread},
                  {"to_thread", s.to_thread},
                  {"at_line", s.at_line.value},
                  {"per_thread_index", s.per_thread_index}});
  Json v = {{"kind", violation_name(cex.violation.kind)},
            {"line", line_json(cex.violation.line)},
            {"blocked_threads", cex.violation.blocked_threads}};
  return {{"steps", steps}, {"switches", sw}, {"violation", v}, {"nondet_choices", choices_json(cex.nondet_choices)}};
}

Counterexample counterexample_from_json(const Json& j) {
  Counterexample c;
  for (const auto& s : j.at("steps")) {
    TraceStep t;
    t.step_index = s.at("step_index");
    t.thread = s.at("thread");
    t.line = LineId{s.at("line").get<int>()};
    for (const auto& [k, v] : s.at("valuation").items()) t.valuation[k] = v.get<Value>();
    c.steps.push_back(std::move(t));
  }
  for (const auto& s : j.at("switches")) {
    ContextSwitchRecord r;
    r.switch_index = s.at("switch_index");
    r.from_thread = s.at("from_thread");
    r.to_thread = s.at("to_thread");
    r.at_line = LineId{s.at("at_line").get<int>()};
    r.per_thread_index = s.at("per_thread_index");
    c.switches.push_back(r);
  }
  const auto& v = j.at("violation");
  c.violation.kind = violation_from_name(v.at("kind"));
  c.violation.line = line_of(v.at("line"));
  c.violation.blocked_threads = v.at("blocked_threads").get<std::vector<int>>();
  c.nondet_choices = choices_of(j.at("nondet_choices"));
  if (c.steps.empty()) throw Error("counterexample has no steps");
  return c;
}

Json to_json(const Schedule& s) {
  Json segs = Json::array();
  for (const auto& g : s.segments) {
    Json lc = Json::object();
    for (const auto& [l, n] : g.loop_counters) lc[std::to_string(l.value)] = n;
    segs.push_back({{"thread", g.thread},
                    {"from_line", g.from_line.value},
                    {"to_line", g.to_line.value},
                    {"loop_counters", lc},
                    {"step_count", g.step_count},
                    {"tag", g.tag}});
  }
  Json ptc = Json::object();
  for (const auto& [t, n] : s.per_thread_counts) ptc[std::to_string(t)] = n;
  return {{"segments", segs},
          {"order_tags", s.order_tags},
          {"per_thread_counts", ptc},
          {"nondet_choices", choices_json(s.nondet_choices)}};
}

Schedule schedule_from_json(const Json& j) {
  Schedule s;
  for (const auto& g : j.at("segments")) {
    Segment seg;
    seg.thread = g.at("thread");
    seg.from_line = LineId{g.at("from_line").get<int>()};
    seg.to_line = LineId{g.at("to_line").get<int>()};
    for (const auto& [k, v] : g.at("loop_counters").items()) seg.loop_counters[LineId{std::stoi(k)}] = v.get<int>();
    seg.step_count = g.at("step_count");
    seg.tag = g.at("tag");
    s.segments.push_back(std::move(seg));
  }
  s.order_tags = j.at("order_tags").get<std::vector<int>>();
  for (const auto& [k, v] : j.at("per_thread_counts").items()) s.per_thread_counts[std::stoi(k)] = v.get<int>();
  s.nondet_choices = choices_of(j.at("nondet_choices"));
  return s;
}

Json to_json(const LineMap& m) {
  Json j = Json::object();
  for (const auto& [seq, o] : m) j[std::to_string(seq.value)] = origin_json(o);
  return j;
}

LineMap line_map_from_json(const Json& j) {
  LineMap m;
  for (const auto& [k, e] : j.items()) {
    LineOrigin o;
    if (e.at("kind") == "original") {
      o = LineOrigin::original(LineId{e.at("value").get<int>()});
    } else if (e.at("kind") == "synthetic") {
      o.kind = synthetic_from_name(e.at("value"));
      if (e.contains("line")) o.line = LineId{e.at("line").get<int>()};
    } else {
      throw Error("unknown line-map kind in entry " + k);
    }
    m[LineId{std::stoi(k)}] = o;
  }
  return m;
}

Json to_json(const InstrumentedProgram& ip) {
  Json sites = Json::object();
  for (const auto& [s, i] : ip.site_of) sites[std::to_string(s.value)] = i.value;
  Json dom = Json::array();
  for (LineId l : ip.diag_domain) dom.push_back(l.value);
  return {{"diag_domain", dom}, {"blocked", ip.blocked}, {"diag_max", ip.diag_max}, {"site_of", sites}};
}

Json to_json(const DiagnosisReport& r) {
  Json ds = Json::array();
  for (const auto& d : r.diagnoses) {
    Json e = {{"seq_line", d.seq_line.value},
              {"original_line", line_json(d.original.source_line())},
              {"witness_value", d.witness_value},
              {"iteration", d.iteration},
              {"oracle_validated", d.oracle_validated}};
    // An out-of-domain diag has no LineMap entry.
    bool mapped = d.original.line.valid() || !d.original.is_original();
    e["origin"] = mapped ? synthetic_name(d.original.kind) : "out-of-domain";
    ds.push_back(std::move(e));
  }
  Json t = Json::object();
  for (const auto& s : r.timings) t[s.stage] = s.seconds;
  Json j = {{"status", status_name(r.status)},
            {"deadlock", r.deadlock},
            {"found_error_count", r.found_error_count},
            {"iterations", r.iterations},
            {"diagnoses", ds},
            {"timings", t}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace mcfl
