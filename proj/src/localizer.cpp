// SPDX-License-Identifier: Apache-2.0

#include "mcfl/localizer.hpp"

#include <chrono>

#include "mcfl/error.hpp"

namespace mcfl {

std::string status_name(ReportStatus s) {
  switch (s) {
    case ReportStatus::FaultsFound: return "faults-found";
    case ReportStatus::NoCounterexample: return "no-counterexample";
    case ReportStatus::Inconclusive: return "inconclusive";
    case ReportStatus::ResourceExhausted: return "resource-exhausted";
  }
  return "?";
}

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& out) : out_(out) {}
  template <typename F>
  auto time(const std::string& stage, F&& f) {
    auto start = std::chrono::steady_clock::now();
    struct Record {
      std::vector<StageTiming>& out;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& t : out)
          if (t.stage == stage) {
            t.seconds += s;
            return;
          }
        out.push_back({stage, s});
      }
    } rec{out_, stage, start};
    return f();
  }

 private:
  std::vector<StageTiming>& out_;
};

VerifierConfig sequential_config(const VerifierConfig& c) {
  VerifierConfig s = c;
  s.context_bound = 0;
  s.deadlock_check = false;
  return s;
}

// Replaces the expression of the statement at `line`; returns false if there
// is no eligible statement there.
bool substitute(Program& p, LineId line, Value witness) {
  bool found = false;
  for_each_stmt(p, [&](Stmt& s) {
    if (s.line != line) return;
    switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::NondetAssign:
        s.kind = StmtKind::Assign;
        s.expr = make_int(witness);
        found = true;
        break;
      case StmtKind::If:
      case StmtKind::While:
        s.expr = make_int(witness);
        found = true;
        break;
      default:
        break;
    }
  });
  return found;
}

bool is_condition(const Program& p, LineId line) {
  bool cond = false;
  for_each_stmt(p, [&](const Stmt& s) {
    if (s.line == line) cond = s.kind == StmtKind::If || s.kind == StmtKind::While;
  });
  return cond;
}

}  // namespace

bool validate_diag(const SequentialProgram& seq, LineId d, Value witness, const VerifierConfig& config) {
  Program p = seq.program;
  if (!substitute(p, d, witness)) return false;
  VerifierConfig c = sequential_config(config);
  c.div_by_zero_check = true;
  auto r = verify(p, c);
  // A substitution that only makes the pinned path infeasible passes
  // vacuously; require a run that actually gets through.
  return r.outcome == Outcome::Safe && !r.bound_hit && r.completed;
}

std::set<LineId> brute_force_fault_lines(const SequentialProgram& seq, const VerifierConfig& config) {
  VerifierConfig c = sequential_config(config);
  c.div_by_zero_check = true;
  auto failing = verify(seq.program, c);
  std::set<LineId> result;
  if (failing.outcome != Outcome::Violation) return result;
  std::set<LineId> on_path;
  for (const auto& st : failing.counterexample->steps) on_path.insert(st.line);
  InstrumentedProgram ip;
  try {
    ip = instrument(seq);
  } catch (const NothingToInstrument&) {
    return result;
  }
  for (LineId line : ip.diag_domain) {
    if (!on_path.count(line)) continue;
    Value lo = config.nondet_lo, hi = config.nondet_hi;
    if (is_condition(seq.program, line)) {
      lo = 0;
      hi = 1;
    }
    for (Value v = lo; v <= hi; ++v)
      if (validate_diag(seq, line, v, config)) {
        result.insert(line);
        break;
      }
  }
  return result;
}

DiagnosisReport localize(const Program& program, const VerifierConfig& config) {
  DiagnosisReport rep;
  Stopwatch sw(rep.timings);

  VerifierConfig first = config;
  first.deadlock_check = true;
  auto r1 = sw.time("verify", [&] { return verify(program, first); });
  if (r1.outcome == Outcome::ResourceExhausted) {
    rep.status = ReportStatus::ResourceExhausted;
    return rep;
  }
  if (r1.outcome == Outcome::Safe) {
    rep.status = ReportStatus::NoCounterexample;
    return rep;
  }
  Counterexample cex = *r1.counterexample;
  rep.deadlock = cex.is_deadlock();
  if (rep.deadlock) {
    VerifierConfig second = config;
    second.deadlock_check = false;
    auto r2 = sw.time("verify", [&] { return verify(program, second); });
    if (r2.outcome == Outcome::ResourceExhausted) {
      rep.status = ReportStatus::ResourceExhausted;
      rep.counterexample = cex;
      return rep;
    }
    if (r2.outcome == Outcome::Violation) cex = *r2.counterexample;
  }
  rep.counterexample = cex;

  try {
    rep.schedule = extract_schedule(program, cex);
    rep.sequential = sw.time("sequentialize", [&] { return sequentialize(program, *rep.schedule, rep.deadlock); });
    rep.instrumented = sw.time("instrument", [&] { return instrument(*rep.sequential); });
  } catch (const UnsupportedSchedule& e) {
    rep.status = ReportStatus::Inconclusive;
    rep.reason = e.what();
    return rep;
  } catch (const RuleGap& e) {
    rep.status = ReportStatus::Inconclusive;
    rep.reason = e.what();
    return rep;
  } catch (const NothingToInstrument& e) {
    rep.status = ReportStatus::Inconclusive;
    rep.reason = e.what();
    return rep;
  }

  VerifierConfig search = sequential_config(config);
  search.div_by_zero_check = false;
  InstrumentedProgram model = *rep.instrumented;
  const std::size_t cap = model.diag_domain.size();
  bool inconclusive = false;
  for (std::size_t iter = 1; iter <= cap; ++iter) {
    auto r = sw.time("localize", [&] { return verify(model.program, search); });
    rep.iterations = static_cast<int>(iter);
    if (r.outcome == Outcome::ResourceExhausted) {
      rep.status = ReportStatus::ResourceExhausted;
      rep.found_error_count = static_cast<int>(rep.diagnoses.size());
      return rep;
    }
    if (r.outcome == Outcome::Safe) {
      rep.iterations = static_cast<int>(iter) - 1;
      break;
    }
    const Counterexample& c = *r.counterexample;
    Value d = c.final_valuation().at("diag");
    Diagnosis dg;
    dg.seq_line = LineId{static_cast<int>(d)};
    dg.iteration = static_cast<int>(iter);
    if (!model.diag_domain.count(dg.seq_line)) {
      rep.diagnoses.push_back(dg);
      inconclusive = true;
      break;
    }
    dg.original = rep.sequential->line_map.at(dg.seq_line);
    LineId site = model.site_of.at(dg.seq_line);
    bool witnessed = false;
    for (const auto& [line, v] : c.nondet_choices)
      if (line == site) {
        dg.witness_value = v;
        witnessed = true;
        break;
      }
    if (witnessed)
      dg.oracle_validated =
          sw.time("validate", [&] { return validate_diag(*rep.sequential, dg.seq_line, dg.witness_value, config); });
    rep.diagnoses.push_back(dg);
    model = block_diag(model, d);
  }
  rep.found_error_count = static_cast<int>(rep.diagnoses.size());
  if (inconclusive || rep.diagnoses.empty())
    rep.status = ReportStatus::Inconclusive;
  else
    rep.status = ReportStatus::FaultsFound;
  return rep;
}

}  // namespace mcfl
