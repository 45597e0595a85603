// SPDX-License-Identifier: Apache-2.0

#include "mcfl/instrumenter.hpp"

#include "mcfl/error.hpp"
#include "mcfl/parser.hpp"

namespace mcfl {

namespace {

ExprPtr diag_is(Value line) { return make_binary(BinaryOp::Eq, make_var("diag"), make_int(line)); }

ExprPtr diag_not(Value v) { return make_binary(BinaryOp::Ne, make_var("diag"), make_int(v)); }

bool eligible_kind(StmtKind k) {
  return k == StmtKind::Assign || k == StmtKind::NondetAssign || k == StmtKind::If || k == StmtKind::While;
}

// Number of statements ahead of main's original body: the diag declaration,
// the draw and one assumption per blocked value.
std::size_t prologue_size(const InstrumentedProgram& ip) { return 2 + ip.blocked.size(); }

}  // namespace

InstrumentedProgram instrument(const SequentialProgram& seq) {
  const Program& src = seq.program;
  bool has_threads = false, has_calls = false, uses_diag = false;
  int max_line = 0;
  for_each_stmt(src, [&](const Stmt& s) {
    has_threads |= s.kind == StmtKind::ThreadCreate;
    has_calls |= s.kind == StmtKind::CallAssign;
    if (is_declaration_kind(s.kind) && s.name == "diag") uses_diag = true;
    max_line = std::max(max_line, s.line.value);
  });
  if (has_threads) throw Error("instrument expects a sequential program (found pthread_create)");
  if (has_calls) throw Error("instrument expects calls to be unwound first");
  if (uses_diag) throw Error("the name 'diag' is reserved for instrumentation");

  InstrumentedProgram ip;
  ip.diag_max = max_line;
  Program out = src;
  // Tag every statement with its sequential line (negated) so the site map
  // survives renumbering.
  for_each_stmt(out, [&](Stmt& s) {
    LineId l = s.line;
    s.line = LineId{-l.value};
    if (s.kind == StmtKind::Assert) s.kind = StmtKind::Assume;
    if (!eligible_kind(s.kind)) return;
    auto it = seq.line_map.find(l);
    if (it == seq.line_map.end() || !it->second.source_line().valid()) return;
    ip.diag_domain.insert(l);
    if (s.kind == StmtKind::Assign || s.kind == StmtKind::NondetAssign) {
      s.expr = make_ternary(diag_is(l.value), make_nondet(), s.expr);
      s.kind = StmtKind::Assign;
    } else {
      s.expr = make_ternary(diag_is(l.value), make_nondet(0, 1), s.expr);
    }
  });
  if (ip.diag_domain.empty()) throw NothingToInstrument("no assignment or condition to instrument");

  FunctionDef& main = out.main();
  if (!main.body.empty() && main.body.back().kind == StmtKind::Return) main.body.pop_back();
  main.returns_value = false;
  std::vector<Stmt> body;
  body.push_back(make_stmt(StmtKind::VarDecl, "diag"));
  body.push_back(make_stmt(StmtKind::NondetAssign, "diag", make_nondet(0, max_line)));
  for (auto& s : main.body) body.push_back(std::move(s));
  body.push_back(make_stmt(StmtKind::Assert, {}, make_int(0)));
  main.body = std::move(body);

  auto remap = renumber(out);
  for (const auto& [old_line, new_line] : remap)
    if (old_line.value < 0 && ip.diag_domain.count(LineId{-old_line.value}))
      ip.site_of[LineId{-old_line.value}] = new_line;
  ip.program = std::move(out);
  check(ip.program);
  return ip;
}

InstrumentedProgram instrument(const Program& program) {
  SequentialProgram seq;
  seq.program = program;
  for_each_stmt(program, [&](const Stmt& s) { seq.line_map[s.line] = LineOrigin::original(s.line); });
  return instrument(seq);
}

InstrumentedProgram block_diag(const InstrumentedProgram& instr, Value value) {
  if (instr.blocked.count(value)) return instr;
  InstrumentedProgram out = instr;
  FunctionDef& main = out.program.main();
  auto at = main.body.begin() + static_cast<long>(prologue_size(instr));
  main.body.insert(at, make_stmt(StmtKind::Assume, {}, diag_not(value)));
  out.blocked.insert(value);
  // The new statement has LineId 0 (invalid), so renumber leaves it out of
  // the map and every other line keeps its relative order.
  auto remap = renumber(out.program);
  for (auto& [seq_line, site] : out.site_of) site = remap.at(site);
  return out;
}

}  // namespace mcfl
