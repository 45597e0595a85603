// SPDX-License-Identifier: Apache-2.0

#include "mcfl/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>

#include "mcfl/error.hpp"
#include "mcfl/instrumenter.hpp"
#include "mcfl/json_io.hpp"
#include "mcfl/parser.hpp"
#include "mcfl/printer.hpp"
#include "mcfl/sequentializer.hpp"

namespace fs = std::filesystem;

namespace mcfl {

VerifierConfig CliConfig::verifier() const {
  VerifierConfig c;
  c.loop_bound = unwind;
  c.context_bound = context_bound;
  c.nondet_lo = nondet_lo;
  c.nondet_hi = nondet_hi;
  c.deadlock_check = deadlock_check;
  c.max_states = max_states;
  return c;
}

std::optional<int> parse_args(int argc, const char* const* argv, CliConfig& config, std::ostream& out,
                              std::ostream& err) {
  CLI::App app{"Bounded verification and fault localization for .mc programs"};
  app.name("mcfl");
  app.require_subcommand(1, 1);

  std::string nondet;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify", "explore interleavings and report the first violation"},
      {"sequentialize", "rewrite a counterexample's schedule as a sequential program"},
      {"instrument", "build the diagnosis model of the sequential program"},
      {"localize", "run the whole pipeline and report fault lines"},
      {"bench", "localize every .mc file in a directory"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("input", config.input_path, name == "bench" ? "directory of .mc files" : ".mc file")->required();
    sub->add_option("--unwind", config.unwind, "loop bound")->check(CLI::PositiveNumber);
    sub->add_option("--context-bound", config.context_bound, "context switches per path")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--nondet", nondet, "nondet() domain, LO..HI");
    sub->add_flag("--deadlock-check", config.deadlock_check, "report deadlocks as violations");
    sub->add_flag("--json", config.json, "JSON output");
    sub->add_flag("--emit-intermediates", config.emit_intermediates,
                  "write counterexample, sequential and instrumented programs next to the input");
    sub->add_option("--max-states", config.max_states, "state cap")
        ->check(CLI::PositiveNumber)
        ->envname("MCFL_MAX_STATES");
    if (name == "sequentialize" || name == "instrument")
      sub->add_option("--cex", config.cex_path, "counterexample JSON from `verify --json`")->check(CLI::ExistingFile);
    if (name == "bench") sub->add_option("--csv", config.csv_path, "CSV output path (default bench.csv)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  config.command = app.get_subcommands().front()->get_name();
  if (!nondet.empty()) {
    static const std::regex range(R"(^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$)");
    std::smatch m;
    if (!std::regex_match(nondet, m, range)) {
      err << "mcfl: --nondet expects LO..HI, got '" << nondet << "'\n";
      return kExitUsage;
    }
    config.nondet_lo = std::stoll(m[1]);
    config.nondet_hi = std::stoll(m[2]);
    if (config.nondet_lo > config.nondet_hi) {
      err << "mcfl: empty nondet range " << nondet << "\n";
      return kExitUsage;
    }
  }
  return std::nullopt;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

fs::path sibling(const fs::path& input, const std::string& suffix) {
  return input.parent_path() / (input.stem().string() + suffix);
}

std::string seconds(double s) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(6) << s;
  return o.str();
}

std::string describe(const Violation& v) {
  std::ostringstream o;
  o << violation_name(v.kind);
  if (v.kind == ViolationKind::Deadlock) {
    o << " (blocked threads";
    for (int t : v.blocked_threads) o << " " << t;
    o << ")";
  } else {
    o << " at line " << v.line.value;
  }
  return o.str();
}

void print_trace(const Counterexample& cex, std::ostream& out) {
  for (const auto& s : cex.steps) {
    out << "  #" << s.step_index << " t" << s.thread << " line " << s.line.value;
    for (const auto& [k, v] : s.valuation) out << " " << k << "=" << v;
    out << "\n";
  }
}

struct Artifacts {
  std::optional<Counterexample> cex;
  std::optional<Schedule> schedule;
  std::optional<SequentialProgram> seq;
  std::optional<InstrumentedProgram> instr;
};

void emit(const fs::path& input, const Artifacts& a) {
  if (a.cex) write_file(sibling(input, ".cex.json"), dump(to_json(*a.cex)));
  if (a.schedule) write_file(sibling(input, ".schedule.json"), dump(to_json(*a.schedule)));
  if (a.seq) {
    write_file(sibling(input, ".seq.mc"), pretty_print(a.seq->program));
    write_file(sibling(input, ".linemap.json"), dump(to_json(a.seq->line_map)));
  }
  if (a.instr) {
    write_file(sibling(input, ".instr.mc"), pretty_print(a.instr->program));
    write_file(sibling(input, ".instr.json"), dump(to_json(*a.instr)));
  }
}

Counterexample read_counterexample(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  if (j.contains("counterexample")) j = j.at("counterexample");
  if (j.is_null()) throw Error(path.string() + ": no counterexample");
  try {
    return counterexample_from_json(j);
  } catch (const Json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

int exit_for(ReportStatus s) {
  switch (s) {
    case ReportStatus::FaultsFound: return kExitFaults;
    case ReportStatus::NoCounterexample: return kExitOk;
    case ReportStatus::Inconclusive: return kExitInconclusive;
    case ReportStatus::ResourceExhausted: return kExitExhausted;
  }
  return kExitUsage;
}

int cmd_verify(const Program& p, const CliConfig& cfg, std::ostream& out) {
  auto r = verify(p, cfg.verifier());
  if (cfg.emit_intermediates && r.counterexample) emit(cfg.input_path, {r.counterexample, {}, {}, {}});
  if (cfg.json) {
    Json j = {{"outcome", outcome_name(r.outcome)},
              {"states", r.states},
              {"bound_hit", r.bound_hit},
              {"counterexample", r.counterexample ? to_json(*r.counterexample) : Json(nullptr)}};
    out << dump(j);
  } else {
    out << cfg.input_path.filename().string() << ": " << outcome_name(r.outcome) << " (" << r.states << " states"
        << (r.bound_hit ? ", loop bound hit" : "") << ")\n";
    if (r.counterexample) {
      out << "violation: " << describe(r.counterexample->violation) << "\n";
      print_trace(*r.counterexample, out);
    }
  }
  switch (r.outcome) {
    case Outcome::Safe: return kExitOk;
    case Outcome::Violation: return kExitFaults;
    case Outcome::ResourceExhausted: return kExitExhausted;
  }
  return kExitUsage;
}

// sequentialize and instrument: both start from a counterexample.
int cmd_transform(const Program& p, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  Artifacts a;
  // Mutex state is kept when the program deadlocks. A replayed counterexample
  // from localize is the non-deadlock one, so --deadlock-check selects it.
  bool deadlock = false;
  if (cfg.cex_path) {
    a.cex = read_counterexample(*cfg.cex_path);
    deadlock = cfg.deadlock_check || a.cex->is_deadlock();
  } else {
    auto r = verify(p, cfg.verifier());
    if (r.outcome == Outcome::Violation && r.counterexample->is_deadlock()) {
      deadlock = true;
      VerifierConfig vc = cfg.verifier();
      vc.deadlock_check = false;
      auto r2 = verify(p, vc);
      // Without a later violation the deadlock trace itself is used.
      if (r2.outcome != Outcome::Safe) r = std::move(r2);
    }
    if (r.outcome == Outcome::ResourceExhausted) {
      err << "mcfl: state cap reached before a counterexample was found\n";
      return kExitExhausted;
    }
    if (r.outcome == Outcome::Safe) {
      err << "mcfl: no counterexample within bounds, nothing to " << cfg.command << "\n";
      return kExitOk;
    }
    a.cex = r.counterexample;
  }
  try {
    a.schedule = extract_schedule(p, *a.cex);
    a.seq = sequentialize(p, *a.schedule, deadlock);
    if (cfg.command == "instrument") a.instr = instrument(*a.seq);
  } catch (const UnsupportedSchedule& e) {
    err << "mcfl: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const RuleGap& e) {
    err << "mcfl: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const NothingToInstrument& e) {
    err << "mcfl: " << e.what() << "\n";
    return kExitInconclusive;
  }
  if (cfg.emit_intermediates) emit(cfg.input_path, a);
  if (cfg.json) {
    Json j;
    if (a.instr) {
      j = {{"program", pretty_print(a.instr->program)}, {"diagnosis", to_json(*a.instr)}};
    } else {
      j = {{"program", pretty_print(a.seq->program)},
           {"line_map", to_json(a.seq->line_map)},
           {"schedule", to_json(*a.schedule)}};
    }
    out << dump(j);
  } else {
    out << pretty_print(a.instr ? a.instr->program : a.seq->program);
  }
  return kExitFaults;
}

void print_report(const DiagnosisReport& r, const std::string& name, std::ostream& out) {
  out << name << ": " << status_name(r.status) << "\n";
  if (r.counterexample) {
    out << "  counterexample: " << describe(r.counterexample->violation);
    if (r.schedule) out << ", " << r.schedule->segments.size() << " segment(s)";
    out << "\n";
  }
  if (r.deadlock) out << "  deadlock: yes\n";
  if (!r.reason.empty()) out << "  reason: " << r.reason << "\n";
  if (r.counterexample)
    out << "  diagnoses: " << r.found_error_count << " in " << r.iterations << " iteration(s)\n";
  for (const auto& d : r.diagnoses) {
    LineId src = d.original.source_line();
    if (!src.valid() && d.original.is_original()) {
      out << "    diag " << d.seq_line.value << " is not a statement of the sequential program\n";
      continue;
    }
    out << "    line " << src.value;
    if (d.original.kind == Synthetic::UnwindCopy) out << " (inlined call)";
    out << ": seq line " << d.seq_line.value << ", witness " << d.witness_value << ", "
        << (d.oracle_validated ? "validated" : "NOT validated") << "\n";
  }
  if (!r.timings.empty()) {
    out << "  time:";
    for (const auto& t : r.timings) out << " " << t.stage << " " << seconds(t.seconds) << "s";
    out << "\n";
  }
}

int cmd_localize(const Program& p, const CliConfig& cfg, std::ostream& out) {
  auto r = localize(p, cfg.verifier());
  if (cfg.emit_intermediates) emit(cfg.input_path, {r.counterexample, r.schedule, r.sequential, r.instrumented});
  if (cfg.json)
    out << dump(to_json(r));
  else
    print_report(r, cfg.input_path.filename().string(), out);
  return exit_for(r.status);
}

double total(const std::vector<StageTiming>& ts) {
  double s = 0;
  for (const auto& t : ts) s += t.seconds;
  return s;
}

double stage(const std::vector<StageTiming>& ts, const std::string& name) {
  for (const auto& t : ts)
    if (t.stage == name) return t.seconds;
  return 0;
}

const std::vector<std::string> kStages = {"verify", "sequentialize", "instrument", "localize", "validate"};

}  // namespace

std::vector<BenchRow> run_bench(const fs::path& dir, const CliConfig& config) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".mc") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<BenchRow> rows;
  for (const auto& f : files) {
    BenchRow row;
    row.file = f.filename().string();
    try {
      Program p = parse_file(f.string());
      auto rep = localize(p, config.verifier());
      row.status = status_name(rep.status);
      row.deadlock = rep.deadlock;
      row.fe = rep.found_error_count;
      row.timings = rep.timings;
      if (rep.sequential) row.ae = static_cast<int>(brute_force_fault_lines(*rep.sequential, config.verifier()).size());
      row.useful = rep.status == ReportStatus::FaultsFound &&
                   std::all_of(rep.diagnoses.begin(), rep.diagnoses.end(),
                               [](const Diagnosis& d) { return d.oracle_validated; });
      row.report = std::move(rep);
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream o;
  o << std::left << std::setw(24) << "F" << std::setw(20) << "status" << std::setw(3) << "D" << std::setw(8)
    << "FE/AE" << std::setw(11) << "VT(s)"
    << "R\n";
  for (const auto& r : rows) {
    std::string fa = std::to_string(r.fe) + "/" + (r.ae ? std::to_string(*r.ae) : "-");
    o << std::left << std::setw(24) << r.file << std::setw(20) << r.status << std::setw(3) << r.deadlock
      << std::setw(8) << fa << std::setw(11) << seconds(total(r.timings)) << r.useful << "\n";
    if (!r.error.empty()) o << "  " << r.error << "\n";
  }
  return o.str();
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream o;
  o << "file,status,D,FE,AE,R";
  for (const auto& s : kStages) o << ",VT_" << s;
  o << ",VT_total\n";
  for (const auto& r : rows) {
    o << r.file << "," << r.status << "," << r.deadlock << "," << r.fe << "," << (r.ae ? std::to_string(*r.ae) : "")
      << "," << r.useful;
    for (const auto& s : kStages) o << "," << seconds(stage(r.timings, s));
    o << "," << seconds(total(r.timings)) << "\n";
  }
  return o.str();
}

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.command == "bench") {
      auto rows = run_bench(config.input_path, config);
      if (config.json) {
        Json a = Json::array();
        for (const auto& r : rows) {
          Json t = Json::object();
          for (const auto& s : r.timings) t[s.stage] = s.seconds;
          a.push_back({{"file", r.file},
                       {"status", r.status},
                       {"D", r.deadlock},
                       {"FE", r.fe},
                       {"AE", r.ae ? Json(*r.ae) : Json(nullptr)},
                       {"R", r.useful},
                       {"timings", t},
                       {"report", r.report ? to_json(*r.report) : Json(nullptr)}});
        }
        out << dump(a);
      } else {
        for (const auto& r : rows)
          if (r.report) print_report(*r.report, r.file, out);
        out << "\n" << bench_table(rows);
      }
      write_file(config.csv_path.value_or("bench.csv"), bench_csv(rows));
      return kExitOk;
    }
    Program p = parse_file(config.input_path.string());
    if (config.command == "verify") return cmd_verify(p, config, out);
    if (config.command == "localize") return cmd_localize(p, config, out);
    if (config.command == "sequentialize" || config.command == "instrument") return cmd_transform(p, config, out, err);
    err << "mcfl: unknown command '" << config.command << "'\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << config.input_path.string() << ":" << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mcfl: " << e.what() << "\n";
    return kExitUsage;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig config;
  if (auto code = parse_args(argc, argv, config, out, err)) return *code;
  return run(config, out, err);
}

}  // namespace mcfl
