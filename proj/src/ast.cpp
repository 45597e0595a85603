// SPDX-License-Identifier: Apache-2.0

#include "mcfl/ast.hpp"

#include <stdexcept>

namespace mcfl {

ExprPtr make_int(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Int;
  e->value = v;
  return e;
}

ExprPtr make_var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->name = std::move(name);
  return e;
}

ExprPtr make_index(std::string array, ExprPtr index) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Index;
  e->name = std::move(array);
  e->operands = {std::move(index)};
  return e;
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Unary;
  e->unary_op = op;
  e->operands = {std::move(operand)};
  return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->binary_op = op;
  e->operands = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr make_ternary(ExprPtr cond, ExprPtr then_value, ExprPtr else_value) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ternary;
  e->operands = {std::move(cond), std::move(then_value), std::move(else_value)};
  return e;
}

ExprPtr make_nondet() {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Nondet;
  return e;
}

ExprPtr make_nondet(Value lo, Value hi) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Nondet;
  e->range = std::make_pair(lo, hi);
  return e;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Int:
      return a.value == b.value;
    case ExprKind::Var:
      return a.name == b.name;
    case ExprKind::Nondet:
      return a.range == b.range;
    case ExprKind::Index:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Unary:
      if (a.unary_op != b.unary_op) return false;
      break;
    case ExprKind::Binary:
      if (a.binary_op != b.binary_op) return false;
      break;
    case ExprKind::Ternary:
      break;
  }
  if (a.operands.size() != b.operands.size()) return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i)
    if (!equal(a.operands[i], b.operands[i])) return false;
  return true;
}

ExprPtr rename_vars(const ExprPtr& e, const std::function<std::string(const std::string&)>& rename) {
  if (!e) return e;
  auto copy = std::make_shared<Expr>(*e);
  if (copy->kind == ExprKind::Var || copy->kind == ExprKind::Index) copy->name = rename(copy->name);
  for (auto& op : copy->operands) op = rename_vars(op, rename);
  return copy;
}

void for_each_name(const Expr& e, const std::function<void(const std::string&)>& fn) {
  if (e.kind == ExprKind::Var || e.kind == ExprKind::Index) fn(e.name);
  for (const auto& op : e.operands) for_each_name(*op, fn);
}

bool contains_nondet(const Expr& e) {
  if (e.kind == ExprKind::Nondet) return true;
  for (const auto& op : e.operands)
    if (contains_nondet(*op)) return true;
  return false;
}

const char* kind_name(StmtKind kind) {
  switch (kind) {
    case StmtKind::VarDecl: return "declaration";
    case StmtKind::ArrayDecl: return "array-declaration";
    case StmtKind::Assign: return "assignment";
    case StmtKind::NondetAssign: return "nondet-assignment";
    case StmtKind::CallAssign: return "call-assignment";
    case StmtKind::If: return "if";
    case StmtKind::While: return "while";
    case StmtKind::For: return "for";
    case StmtKind::Switch: return "switch";
    case StmtKind::Case: return "case";
    case StmtKind::Default: return "default";
    case StmtKind::Break: return "break";
    case StmtKind::Block: return "block";
    case StmtKind::Assert: return "assert";
    case StmtKind::Assume: return "assume";
    case StmtKind::Return: return "return";
    case StmtKind::ThreadDecl: return "pthread_t";
    case StmtKind::AttrDecl: return "pthread_attr_t";
    case StmtKind::CondAttrDecl: return "pthread_condattr_t";
    case StmtKind::ThreadCreate: return "pthread_create";
    case StmtKind::ThreadJoin: return "pthread_join";
    case StmtKind::ThreadExit: return "pthread_exit";
    case StmtKind::MutexDecl: return "pthread_mutex_t";
    case StmtKind::MutexLock: return "pthread_mutex_lock";
    case StmtKind::MutexUnlock: return "pthread_mutex_unlock";
    case StmtKind::CondDecl: return "pthread_cond_t";
    case StmtKind::CondInit: return "pthread_cond_init";
    case StmtKind::CondWait: return "pthread_cond_wait";
    case StmtKind::CondSignal: return "pthread_cond_signal";
  }
  return "?";
}

bool is_pthread_kind(StmtKind kind) {
  switch (kind) {
    case StmtKind::ThreadDecl:
    case StmtKind::AttrDecl:
    case StmtKind::CondAttrDecl:
    case StmtKind::ThreadCreate:
    case StmtKind::ThreadJoin:
    case StmtKind::ThreadExit:
    case StmtKind::MutexDecl:
    case StmtKind::MutexLock:
    case StmtKind::MutexUnlock:
    case StmtKind::CondDecl:
    case StmtKind::CondInit:
    case StmtKind::CondWait:
    case StmtKind::CondSignal:
      return true;
    default:
      return false;
  }
}

bool is_declaration_kind(StmtKind kind) {
  switch (kind) {
    case StmtKind::VarDecl:
    case StmtKind::ArrayDecl:
    case StmtKind::ThreadDecl:
    case StmtKind::AttrDecl:
    case StmtKind::CondAttrDecl:
    case StmtKind::MutexDecl:
    case StmtKind::CondDecl:
      return true;
    default:
      return false;
  }
}

const FunctionDef* Program::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

FunctionDef* Program::find_function(const std::string& name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const FunctionDef& Program::main() const {
  const auto* f = find_function("main");
  if (!f) throw std::logic_error("program has no main");
  return *f;
}

FunctionDef& Program::main() {
  auto* f = find_function("main");
  if (!f) throw std::logic_error("program has no main");
  return *f;
}

std::vector<std::string> Program::thread_functions() const {
  std::vector<std::string> out;
  for_each_stmt(*this, [&](const Stmt& s) {
    if (s.kind != StmtKind::ThreadCreate) return;
    for (const auto& n : out)
      if (n == s.other) return;
    out.push_back(s.other);
  });
  return out;
}

Stmt make_stmt(StmtKind kind, std::string name, ExprPtr expr) {
  Stmt s;
  s.kind = kind;
  s.name = std::move(name);
  s.expr = std::move(expr);
  return s;
}

Stmt make_if(ExprPtr cond, std::vector<Stmt> then_body) {
  Stmt s = make_stmt(StmtKind::If, {}, std::move(cond));
  s.body = std::move(then_body);
  return s;
}

Stmt make_block(std::vector<Stmt> body) {
  Stmt s = make_stmt(StmtKind::Block);
  s.body = std::move(body);
  return s;
}

Stmt make_case(Value v) {
  Stmt s = make_stmt(StmtKind::Case);
  s.values = {v};
  return s;
}

namespace {

template <typename StmtT, typename Fn>
void walk(std::vector<StmtT>& body, Fn& fn) {
  for (auto& s : body) {
    fn(s);
    walk(s.body, fn);
    walk(s.else_body, fn);
  }
}

template <typename StmtT, typename Fn>
void walk(const std::vector<StmtT>& body, Fn& fn) {
  for (const auto& s : body) {
    fn(s);
    walk(s.body, fn);
    walk(s.else_body, fn);
  }
}

}  // namespace

void for_each_stmt(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn) { walk(body, fn); }
void for_each_stmt(std::vector<Stmt>& body, const std::function<void(Stmt&)>& fn) { walk(body, fn); }

void for_each_stmt(const Program& p, const std::function<void(const Stmt&)>& fn) {
  walk(p.globals, fn);
  for (const auto& f : p.functions) walk(f.body, fn);
}

void for_each_stmt(Program& p, const std::function<void(Stmt&)>& fn) {
  walk(p.globals, fn);
  for (auto& f : p.functions) walk(f.body, fn);
}

std::map<LineId, LineId> renumber(Program& p) {
  std::map<LineId, LineId> remap;
  int next = 1;
  for_each_stmt(p, [&](Stmt& s) {
    LineId fresh{next++};
    if (s.line.valid()) remap[s.line] = fresh;
    s.line = fresh;
  });
  return remap;
}

std::map<LineId, const Stmt*> line_table(const Program& p) {
  std::map<LineId, const Stmt*> table;
  for_each_stmt(p, [&](const Stmt& s) { table[s.line] = &s; });
  return table;
}

std::size_t statement_count(const Program& p) {
  std::size_t n = 0;
  for_each_stmt(p, [&](const Stmt&) { ++n; });
  return n;
}

namespace {

bool equal_bodies(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(a[i], b[i])) return false;
  return true;
}

bool equal_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i])) return false;
  return true;
}

}  // namespace

bool structurally_equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.line == b.line && a.name == b.name && a.other == b.other &&
         equal(a.expr, b.expr) && equal(a.cond, b.cond) && equal(a.step, b.step) &&
         equal_exprs(a.args, b.args) && a.values == b.values && a.has_else == b.has_else &&
         equal_bodies(a.body, b.body) && equal_bodies(a.else_body, b.else_body);
}

bool structurally_equal(const Program& a, const Program& b) {
  if (!equal_bodies(a.globals, b.globals)) return false;
  if (a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& fa = a.functions[i];
    const auto& fb = b.functions[i];
    if (fa.name != fb.name || fa.returns_value != fb.returns_value || fa.params != fb.params ||
        !equal_bodies(fa.body, fb.body))
      return false;
  }
  return true;
}

}  // namespace mcfl
