// SPDX-License-Identifier: Apache-2.0
//
// Small-step interpreter for unwound programs. Shared by the verifier (which
// explores successors) and the sequentializer (which replays one trace and
// needs to know which statement each step executed).

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mcfl/ast.hpp"
#include "mcfl/unwind.hpp"

namespace mcfl {

struct Slot {
  bool global = true;
  int index = -1;
};

enum class VarClass { Int, Array, Thread, Attr, CondAttr, Mutex, Cond };

struct CExpr {
  ExprKind kind = ExprKind::Int;
  Value value = 0;
  Slot slot;
  const std::vector<Value>* array = nullptr;
  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  std::vector<CExpr> ops;
  bool has_range = false;
  Value lo = 0, hi = 0;
};

enum class Op {
  Decl,
  Assign,
  Branch,     // if / for condition; false -> target
  WhileCond,  // while condition; false -> target
  Switch,
  Assert,
  Assume,
  Return,
  Create,
  Join,
  Exit,
  Lock,
  Unlock,
  CondInit,
  CondWait,
  CondSignal,
  Nop,
  // Non-step instructions.
  Jump,
  LoopEnter,
  End,
};

bool is_step(Op op);

struct Instr {
  Op op = Op::Nop;
  const Stmt* stmt = nullptr;
  CExpr expr;
  Slot slot;   // target / handle / mutex / cond
  Slot slot2;  // cond-wait mutex
  Value init = 0;
  int target = -1;
  int loop = -1;      // WhileCond / LoopEnter
  int function = -1;  // Create
  std::vector<std::pair<Value, int>> cases;
  int default_target = -1;
};

struct CompiledFunction {
  std::string name;
  std::vector<Instr> code;
  std::vector<std::string> local_names;
  std::vector<VarClass> local_classes;
  std::vector<Value> local_init;
  int loop_count = 0;
  std::map<const Stmt*, int> loop_of;  // while statement -> loop id
};

enum class Status { Run, WaitCond, Reacquire, Done };

struct ThreadState {
  int function = 0;
  int pc = 0;
  Status status = Status::Run;
  Value wait_cond = 0;
  std::vector<Value> locals;
  std::vector<int> loops;
};

struct State {
  std::vector<Value> globals;
  std::vector<ThreadState> threads;
  int last = -1;
  int switches = 0;

  std::string key() const;  // everything except `switches`
};

enum class StepOutcome { Ok, AssertFail, DivByZero, Cut };

struct StepResult {
  StepOutcome outcome = StepOutcome::Ok;
  const Instr* instr = nullptr;
  bool branch = false;     // Branch / WhileCond taken
  bool bound_hit = false;  // Cut by the loop bound
  bool div_cut = false;    // Cut by division by zero with the check off
};

// A nondet draw: `ranged` is false for a plain `nondet()`, which draws from
// the caller's domain. `line` is the executing statement's line.
struct NondetRequest {
  bool ranged = false;
  Value lo = 0, hi = 0;
  LineId line;
};
using ChoiceFn = std::function<Value(const NondetRequest&)>;

class Machine {
 public:
  // Compiles `program` after unwinding calls.
  explicit Machine(const Program& program);

  const detail::Unwound& unwound() const { return *unwound_; }
  const std::vector<CompiledFunction>& functions() const { return functions_; }
  int function_index(const std::string& name) const;

  State initial() const;

  bool enabled(const State& s, int thread) const;
  bool live(const State& s, int thread) const { return s.threads[thread].status != Status::Done; }
  bool all_done(const State& s) const;
  bool any_enabled(const State& s) const;
  std::vector<int> blocked_threads(const State& s) const;

  // Executes one step of `thread` (which must be enabled). Does not touch
  // `last` or `switches`.
  StepResult step(State& s, int thread, int loop_bound, bool div_check, const ChoiceFn& choose) const;

  const Instr& current(const State& s, int thread) const {
    const auto& t = s.threads[thread];
    return functions_[t.function].code[t.pc];
  }

  // Shared ints and mutexes (as 0/1), plus `thread`'s int locals.
  std::map<std::string, Value> valuation(const State& s, int thread) const;
  // Shared ints and mutexes only.
  std::map<std::string, Value> globals_valuation(const State& s) const;

  const std::vector<std::string>& global_names() const { return global_names_; }
  const std::vector<VarClass>& global_classes() const { return global_classes_; }

 private:
  std::unique_ptr<detail::Unwound> unwound_;
  std::vector<std::string> global_names_;
  std::vector<VarClass> global_classes_;
  std::vector<Value> global_init_;
  std::vector<std::vector<Value>> arrays_;  // indexed by global slot
  std::vector<CompiledFunction> functions_;

  void normalize(ThreadState& t) const;
  int spawn(State& s, int function) const;
  Value eval(const CExpr& e, const State& s, const ThreadState& t, const ChoiceFn& choose, LineId line) const;
  Value& ref(State& s, ThreadState& t, Slot slot) const;
  Value cond_key(Slot slot, int thread) const;

  friend class Compiler;
};

}  // namespace mcfl
