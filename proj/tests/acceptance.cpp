// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

#include "mcfl/cli.hpp"
#include "mcfl/localizer.hpp"
#include "mcfl/machine.hpp"
#include "mcfl/parser.hpp"
#include "mcfl/printer.hpp"
#include "mcfl/sequentializer.hpp"
#include "mcfl/unwind.hpp"
#include "mcfl/verifier.hpp"
#include "support.hpp"

namespace mcfl {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::source_dir;

struct Verdict {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string join(const std::set<int>& s) {
  std::string r;
  for (int v : s) r += (r.empty() ? "" : ",") + std::to_string(v);
  return "{" + r + "}";
}

Program load(const std::string& rel) { return parse_file((source_dir() / rel).string()); }

// The sample's lines 5 and 7 are the branch on `a` and `b = 2;`.
Verdict single_fault_diagnoses() {
  Verdict v;
  VerifierConfig c;
  c.loop_bound = 3;
  c.nondet_lo = 0;
  c.nondet_hi = 8;
  auto start = std::chrono::steady_clock::now();
  DiagnosisReport r = localize(load("samples/single_fault.mc"), c);
  double t = seconds_since(start);
  std::set<int> lines;
  for (const auto& d : r.diagnoses) lines.insert(d.original.source_line().value);
  std::ostringstream got;
  got << "status " << status_name(r.status) << ", lines " << join(lines) << ", " << r.iterations << " iterations, "
      << t << "s";
  v.detail = got.str();
  if (r.status != ReportStatus::FaultsFound) v.fail("status " + status_name(r.status));
  if (lines != std::set<int>{5, 7}) v.fail("expected lines {5,7}, got " + join(lines));
  if (r.iterations > 2) v.fail(std::to_string(r.iterations) + " blocking iterations (limit 2)");
  if (t >= 5.0) v.fail("took " + std::to_string(t) + "s");
  return v;
}

VerifierConfig random_config() {
  VerifierConfig c;
  c.nondet_lo = 0;
  c.nondet_hi = 2;
  return c;
}

Verdict replay_equivalence() {
  Verdict v;
  std::mt19937 rng(2024);
  testing::GenOptions g;
  g.division = true;
  int found = 0, ok = 0, tried = 0;
  while (found < 200 && tried < 5000) {
    ++tried;
    std::string src = testing::generate_program(rng, g);
    Program p = parse(src);
    auto r = verify(p, random_config());
    if (!r.counterexample) continue;
    ++found;
    const Counterexample& cex = *r.counterexample;
    try {
      SequentialProgram seq = sequentialize(p, extract_schedule(p, cex), cex.is_deadlock());
      VerifierConfig s = random_config();
      s.context_bound = 0;
      auto sr = verify(seq.program, s);
      bool same = sr.outcome == Outcome::Violation && sr.counterexample->violation.kind == cex.violation.kind &&
                  seq.line_map.at(sr.counterexample->violation.line) == LineOrigin::original(cex.violation.line);
      if (same)
        for (const auto& gdecl : p.globals)
          if (gdecl.kind == StmtKind::VarDecl &&
              sr.counterexample->final_valuation().at(gdecl.name) != cex.final_valuation().at(gdecl.name))
            same = false;
      if (same) ++ok;
      else if (v.pass) v.fail("mismatch on:\n" + src);
    } catch (const std::exception& e) {
      if (v.pass) v.fail(std::string(e.what()) + " on:\n" + src);
    }
  }
  if (found < 200) v.fail("only " + std::to_string(found) + " violating programs generated");
  std::string summary = std::to_string(ok) + "/" + std::to_string(found) + " reproduced";
  v.detail = v.pass ? summary : summary + "; " + v.detail;
  return v;
}

Verdict order_array() {
  Verdict v;
  Program p = parse(R"(int x;
void t1() {
  assert(x != 2);
}
void t2() {
  x = 2;
}
void main() {
  pthread_t a;
  pthread_t b;
  pthread_create(a, t1);
  pthread_create(b, t2);
}
)");
  auto r = verify(p, {});
  if (!r.counterexample) {
    v.fail("no counterexample");
    return v;
  }
  SequentialProgram seq = sequentialize(p, extract_schedule(p, *r.counterexample), false);
  const Stmt& order = seq.program.globals.back();
  std::vector<Value> want = {11, 31, 21};
  if (order.name != "order" || order.values != want) v.fail("order array is not {11, 31, 21}");

  // Outer case of each line inside a thread block.
  std::map<LineId, int> owner;
  const Stmt& sw = seq.program.main().body.at(1).body.at(0);
  for (std::size_t i = 0; i + 1 < sw.body.size(); ++i)
    if (sw.body[i].kind == StmtKind::Case && sw.body[i + 1].kind == StmtKind::Block) {
      int n = static_cast<int>(sw.body[i].values.at(0));
      for_each_stmt(sw.body[i + 1].body, [&](const Stmt& s) { owner[s.line] = n; });
    }
  VerifierConfig s;
  s.context_bound = 0;
  auto sr = verify(seq.program, s);
  std::vector<int> visited;
  if (sr.counterexample)
    for (const auto& st : sr.counterexample->steps) {
      auto it = owner.find(st.line);
      if (it != owner.end() && (visited.empty() || visited.back() != it->second)) visited.push_back(it->second);
    }
  if (visited != std::vector<int>{1, 3, 2}) v.fail("outer cases not visited as 1, 3, 2");
  if (v.pass) v.detail = "order = {11, 31, 21}, outer cases 1 -> 3 -> 2";
  return v;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

Verdict pthread_rules() {
  Verdict v;
  Program p = parse(R"(pthread_mutex_t m;
pthread_cond_t c;
void w() {
  pthread_exit();
}
void main() {
  pthread_t t;
  pthread_attr_t at;
  pthread_condattr_t ca;
  pthread_cond_init(c);
  pthread_create(t, w);
  pthread_mutex_lock(m);
  pthread_cond_wait(c, m);
  pthread_cond_signal(c);
  pthread_mutex_unlock(m);
  pthread_join(t);
}
)");
  std::map<std::string, const Stmt*> by_text;
  for_each_stmt(p, [&](const Stmt& s) { by_text[trim(print_stmt(s))] = &s; });
  auto render = [](const std::vector<Stmt>& out) {
    if (out.empty()) return std::string("-");
    std::string r;
    for (const auto& s : out) r += (r.empty() ? "" : " ") + trim(print_stmt(s));
    return r;
  };
  std::istringstream golden(read_text(source_dir() / "tests/golden/pthread_rules.txt"));
  std::string row;
  int exact = 0, total = 0;
  while (std::getline(golden, row)) {
    if (row.empty() || row[0] == '#') continue;
    auto a = row.find(" | ");
    auto b = row.find(" | ", a + 3);
    std::string fragment = row.substr(0, a);
    const Stmt* s = by_text.count(fragment) ? by_text.at(fragment) : nullptr;
    for (bool deadlock : {false, true}) {
      ++total;
      std::string want = deadlock ? row.substr(b + 3) : row.substr(a + 3, b - a - 3);
      if (s && render(apply_pthread_rules(*s, deadlock)) == want) ++exact;
      else v.fail(fragment + (deadlock ? " (deadlock)" : ""));
    }
  }
  if (total != 26) v.fail("golden file has " + std::to_string(total / 2) + " rows");
  std::string summary = std::to_string(exact) + "/" + std::to_string(total) + " rewrites exact";
  v.detail = v.pass ? summary : summary + "; " + v.detail;
  return v;
}

std::map<std::string, Value> run_main(const Program& p, Value input) {
  Machine m(p);
  State s = m.initial();
  auto choose = [&](const NondetRequest&) { return input; };
  while (!m.all_done(s))
    if (m.step(s, 0, 100, true, choose).outcome != StepOutcome::Ok) break;
  return m.valuation(s, 0);
}

Verdict unwinding() {
  Verdict v;
  Program inlined = unwind_calls(load("samples/call.mc"));
  Program expected = parse(read_text(source_dir() / "tests/golden/call_inlined.mc"));
  int agree = 0;
  for (Value x = -8; x <= 8; ++x) {
    auto got = run_main(inlined, x);
    auto want = run_main(expected, x);
    if (got.at("a") == want.at("a") && got.at("i") == want.at("i")) ++agree;
    else v.fail("differs at input " + std::to_string(x));
  }
  if (v.pass) v.detail = std::to_string(agree) + "/17 inputs agree";
  return v;
}

Verdict benchmark_sweep() {
  Verdict v;
  CliConfig c;
  auto start = std::chrono::steady_clock::now();
  auto rows = run_bench(source_dir() / "benchmarks", c);
  double t = seconds_since(start);
  std::map<std::string, const BenchRow*> by_file;
  for (const auto& r : rows) by_file[r.file] = &r;
  for (const char* f : {"account", "arithmetic_prog", "circular_buffer", "lazy01", "queue", "sync02"}) {
    std::string name = std::string(f) + ".mc";
    if (!by_file.count(name)) {
      v.fail(name + " missing");
      continue;
    }
    const BenchRow& r = *by_file.at(name);
    if (r.status != "faults-found" || !r.useful) v.fail(name + ": " + r.status + ", R=" + std::to_string(r.useful));
    if (!r.ae || *r.ae != r.fe) v.fail(name + ": FE " + std::to_string(r.fe) + " vs AE " + (r.ae ? std::to_string(*r.ae) : "-"));
  }
  for (const char* f : {"sync01", "token_ring"}) {
    std::string name = std::string(f) + ".mc";
    if (!by_file.count(name) || by_file.at(name)->status != "inconclusive") v.fail(name + " not inconclusive");
  }
  if (t >= 120) v.fail("sweep took " + std::to_string(t) + "s");
  if (v.pass) {
    std::ostringstream d;
    d << rows.size() << " ports, six R=1 with FE=AE, sync01/token_ring inconclusive, " << t << "s";
    v.detail = d.str();
  }
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  std::mt19937 rng(99);
  testing::GenOptions g;
  g.max_stmts = 6;
  g.division = true;
  int agree = 0, total = 0, violating = 0;
  for (int i = 0; i < 300; ++i) {
    std::string src = testing::generate_program(rng, g);
    Program p = parse(src);
    VerifierConfig c = random_config();
    bool fast = verify(p, c).outcome == Outcome::Violation;
    bool slow = testing::naive_explore(p, c).violation;
    ++total;
    violating += slow;
    if (fast == slow) ++agree;
    else if (v.pass) v.fail("disagree on:\n" + src);
  }
  std::string summary = std::to_string(agree) + "/" + std::to_string(total) + " agree (" +
                        std::to_string(violating) + " violating)";
  v.detail = v.pass ? summary : summary + "; " + v.detail;
  return v;
}

Verdict termination() {
  Verdict v;
  std::vector<Program> corpus;
  for (const char* dir : {"samples", "benchmarks"})
    for (const auto& e : fs::directory_iterator(source_dir() / dir))
      if (e.path().extension() == ".mc") corpus.push_back(parse_file(e.path().string()));
  std::mt19937 rng(2024);
  testing::GenOptions g;
  g.division = true;
  for (int i = 0; i < 200; ++i) corpus.push_back(parse(testing::generate_program(rng, g)));
  int runs = 0;
  for (const auto& p : corpus) {
    VerifierConfig c = random_config();
    DiagnosisReport r = localize(p, c);
    ++runs;
    std::set<LineId> seen;
    for (const auto& d : r.diagnoses)
      if (!seen.insert(d.seq_line).second) v.fail("diag " + std::to_string(d.seq_line.value) + " repeated");
    std::size_t cap = r.instrumented ? r.instrumented->diag_domain.size() : 0;
    if (static_cast<std::size_t>(r.iterations) > cap) v.fail("iterations exceed the diag domain");
  }
  if (v.pass) v.detail = std::to_string(runs) + " localization runs within bounds, no repeats";
  return v;
}

}  // namespace
}  // namespace mcfl

int main() {
  using namespace mcfl;
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"single-fault diagnoses", single_fault_diagnoses},
      {"replay equivalence", replay_equivalence},
      {"order array", order_array},
      {"pthread rewrite rules", pthread_rules},
      {"call unwinding", unwinding},
      {"benchmark sweep", benchmark_sweep},
      {"verifier oracle", oracle_equivalence},
      {"termination", termination},
  };
  int failed = 0;
  int n = 0;
  for (const auto& c : criteria) {
    ++n;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::cout << "criterion " << n << " " << (v.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << v.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
