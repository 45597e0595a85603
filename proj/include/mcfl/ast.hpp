// SPDX-License-Identifier: Apache-2.0
//
// Abstract syntax for the concurrent mini-C language (`.mc` files).
//
// Every statement carries a LineId. Parsed programs number their statements
// densely, in source order, starting at 1 (globals first, then function
// bodies in pre-order). Transformations that build new trees call renumber()
// to restore that invariant before handing a program to anyone else.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcfl {

using Value = std::int64_t;

struct LineId {
  int value = 0;

  constexpr LineId() = default;
  constexpr explicit LineId(int v) : value(v) {}
  constexpr bool valid() const { return value != 0; }
  friend constexpr auto operator<=>(LineId, LineId) = default;
};

// ---------------------------------------------------------------------------
// Expressions

enum class ExprKind { Int, Var, Index, Unary, Binary, Ternary, Nondet };
enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Int;
  Value value = 0;          // Int
  std::string name;         // Var, Index (array name)
  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  std::vector<ExprPtr> operands;
  // Nondet: explicit inclusive range; absent means "the verifier's domain".
  std::optional<std::pair<Value, Value>> range;
};

ExprPtr make_int(Value v);
ExprPtr make_var(std::string name);
ExprPtr make_index(std::string array, ExprPtr index);
ExprPtr make_unary(UnaryOp op, ExprPtr operand);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_ternary(ExprPtr cond, ExprPtr then_value, ExprPtr else_value);
ExprPtr make_nondet();
ExprPtr make_nondet(Value lo, Value hi);

bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);

// Returns a copy of `e` with every variable/array name passed through `rename`.
ExprPtr rename_vars(const ExprPtr& e, const std::function<std::string(const std::string&)>& rename);

// Visits every variable or array name referenced by `e`.
void for_each_name(const Expr& e, const std::function<void(const std::string&)>& fn);

bool contains_nondet(const Expr& e);

// ---------------------------------------------------------------------------
// Statements

enum class StmtKind {
  VarDecl,       // int x [= e];
  ArrayDecl,     // int a[N] = {..};   (global, read-only)
  Assign,        // x = e;
  NondetAssign,  // x = nondet();  or  x = nondet(lo, hi);
  CallAssign,    // x = f(args);
  If,
  While,
  For,           // for (x = e; cond; x = step) { .. }
  Switch,
  Case,          // case N:
  Default,       // default:
  Break,         // exits the innermost enclosing switch
  Block,
  Assert,
  Assume,
  Return,
  // pthread-category statements
  ThreadDecl,    // pthread_t t;
  AttrDecl,      // pthread_attr_t a;
  CondAttrDecl,  // pthread_condattr_t a;
  ThreadCreate,  // pthread_create(t, f);
  ThreadJoin,    // pthread_join(t);
  ThreadExit,    // pthread_exit();
  MutexDecl,     // pthread_mutex_t m;
  MutexLock,     // pthread_mutex_lock(m);
  MutexUnlock,   // pthread_mutex_unlock(m);
  CondDecl,      // pthread_cond_t c;
  CondInit,      // pthread_cond_init(c);
  CondWait,      // pthread_cond_wait(c, m);
  CondSignal,    // pthread_cond_signal(c);
};

const char* kind_name(StmtKind kind);
bool is_pthread_kind(StmtKind kind);
bool is_declaration_kind(StmtKind kind);

struct Stmt {
  StmtKind kind = StmtKind::Block;
  LineId line;
  std::string name;           // target, declared name, sync object, loop variable
  std::string other;          // callee (call / create), mutex of a cond wait
  ExprPtr expr;               // init, rhs, condition, assertion, return value, scrutinee
  ExprPtr cond;               // for: condition
  ExprPtr step;               // for: step value assigned to `name`
  std::vector<ExprPtr> args;  // call arguments
  std::vector<Value> values;  // case label value; array contents
  std::vector<Stmt> body;     // block / then / loop body / switch body
  std::vector<Stmt> else_body;
  bool has_else = false;
};

struct FunctionDef {
  std::string name;
  bool returns_value = false;
  std::vector<std::string> params;
  std::vector<Stmt> body;
};

struct Program {
  std::vector<Stmt> globals;
  std::vector<FunctionDef> functions;

  const FunctionDef* find_function(const std::string& name) const;
  FunctionDef* find_function(const std::string& name);
  const FunctionDef& main() const;
  FunctionDef& main();
  // Functions referenced by some pthread_create, in order of first reference.
  std::vector<std::string> thread_functions() const;
};

// Statement builders used by the transformations.
Stmt make_stmt(StmtKind kind, std::string name = {}, ExprPtr expr = nullptr);
Stmt make_if(ExprPtr cond, std::vector<Stmt> then_body);
Stmt make_block(std::vector<Stmt> body);
Stmt make_case(Value v);

// Pre-order traversal in source order: globals, then each function body.
void for_each_stmt(const Program& p, const std::function<void(const Stmt&)>& fn);
void for_each_stmt(Program& p, const std::function<void(Stmt&)>& fn);
void for_each_stmt(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn);
void for_each_stmt(std::vector<Stmt>& body, const std::function<void(Stmt&)>& fn);

// Reassigns dense LineIds (1..N) in source order. Returns old -> new.
std::map<LineId, LineId> renumber(Program& p);

std::map<LineId, const Stmt*> line_table(const Program& p);

std::size_t statement_count(const Program& p);

bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const Program& a, const Program& b);

}  // namespace mcfl

template <>
struct std::hash<mcfl::LineId> {
  std::size_t operator()(mcfl::LineId id) const noexcept { return std::hash<int>{}(id.value); }
};
