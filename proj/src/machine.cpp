// SPDX-License-Identifier: Apache-2.0

#include "mcfl/machine.hpp"

#include <cstring>
#include <limits>

#include "mcfl/error.hpp"

namespace mcfl {

bool is_step(Op op) { return op != Op::Jump && op != Op::LoopEnter && op != Op::End; }

namespace {

struct DivByZero {};

Value wrap_add(Value a, Value b) {
  return static_cast<Value>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
Value wrap_sub(Value a, Value b) {
  return static_cast<Value>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
Value wrap_mul(Value a, Value b) {
  return static_cast<Value>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

VarClass class_of(StmtKind k) {
  switch (k) {
    case StmtKind::ArrayDecl: return VarClass::Array;
    case StmtKind::ThreadDecl: return VarClass::Thread;
    case StmtKind::AttrDecl: return VarClass::Attr;
    case StmtKind::CondAttrDecl: return VarClass::CondAttr;
    case StmtKind::MutexDecl: return VarClass::Mutex;
    case StmtKind::CondDecl: return VarClass::Cond;
    default: return VarClass::Int;
  }
}

// Thread handles start out invalid; everything else starts at 0.
Value default_value(VarClass c) { return c == VarClass::Thread ? -1 : 0; }

}  // namespace

class Compiler {
 public:
  Compiler(Machine& m, const Program& p) : m_(m), p_(p) {}

  void run() {
    for (const auto& g : p_.globals) {
      int idx = static_cast<int>(m_.global_names_.size());
      globals_[g.name] = idx;
      m_.global_names_.push_back(g.name);
      VarClass c = class_of(g.kind);
      m_.global_classes_.push_back(c);
      Value init = default_value(c);
      if (g.kind == StmtKind::VarDecl && g.expr) init = g.expr->value;
      m_.global_init_.push_back(init);
      m_.arrays_.push_back(g.kind == StmtKind::ArrayDecl ? g.values : std::vector<Value>{});
    }
    for (const auto& f : p_.functions) m_.functions_.push_back(CompiledFunction{f.name, {}, {}, {}, {}, 0, {}});
    for (std::size_t i = 0; i < p_.functions.size(); ++i) compile(p_.functions[i], m_.functions_[i]);
  }

 private:
  Machine& m_;
  const Program& p_;
  std::map<std::string, int> globals_;
  std::map<std::string, int> locals_;
  CompiledFunction* fn_ = nullptr;
  struct SwitchCtx {
    int instr;
    std::vector<int> breaks;
  };
  std::vector<SwitchCtx> switches_;

  Slot slot_of(const std::string& name) const {
    auto l = locals_.find(name);
    if (l != locals_.end()) return Slot{false, l->second};
    auto g = globals_.find(name);
    if (g != globals_.end()) return Slot{true, g->second};
    throw Error("internal: unresolved name '" + name + "'");
  }

  CExpr cexpr(const ExprPtr& e) const {
    CExpr c;
    if (!e) return c;
    c.kind = e->kind;
    c.value = e->value;
    c.unary_op = e->unary_op;
    c.binary_op = e->binary_op;
    if (e->kind == ExprKind::Var) c.slot = slot_of(e->name);
    if (e->kind == ExprKind::Index) {
      c.slot = slot_of(e->name);
      c.array = &m_.arrays_[c.slot.index];
    }
    if (e->range) {
      c.has_range = true;
      c.lo = e->range->first;
      c.hi = e->range->second;
    }
    for (const auto& op : e->operands) c.ops.push_back(cexpr(op));
    return c;
  }

  int emit(Instr i) {
    fn_->code.push_back(std::move(i));
    return static_cast<int>(fn_->code.size()) - 1;
  }
  int here() const { return static_cast<int>(fn_->code.size()); }

  Instr make(Op op, const Stmt& s) {
    Instr i;
    i.op = op;
    i.stmt = &s;
    return i;
  }

  void compile(const FunctionDef& f, CompiledFunction& out) {
    fn_ = &out;
    locals_.clear();
    auto add_local = [&](const std::string& n, VarClass c) {
      locals_[n] = static_cast<int>(out.local_names.size());
      out.local_names.push_back(n);
      out.local_classes.push_back(c);
      out.local_init.push_back(default_value(c));
    };
    for (const auto& prm : f.params) add_local(prm, VarClass::Int);
    for_each_stmt(f.body, [&](const Stmt& s) {
      if (is_declaration_kind(s.kind)) add_local(s.name, class_of(s.kind));
    });
    body(f.body);
    Instr end;
    end.op = Op::End;
    emit(end);
    int end_pc = here() - 1;
    for (auto& i : out.code)
      if (i.op == Op::Return || i.op == Op::Exit) i.target = end_pc;
  }

  void body(const std::vector<Stmt>& b) {
    for (const auto& s : b) stmt(s);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::VarDecl: {
        Instr i = make(Op::Decl, s);
        i.slot = slot_of(s.name);
        if (s.expr) i.expr = cexpr(s.expr);
        else i.expr = cexpr(make_int(0));
        emit(std::move(i));
        break;
      }
      case StmtKind::ThreadDecl:
      case StmtKind::AttrDecl:
      case StmtKind::CondAttrDecl:
      case StmtKind::MutexDecl:
      case StmtKind::CondDecl: {
        Instr i = make(Op::Decl, s);
        i.slot = slot_of(s.name);
        i.expr = cexpr(make_int(default_value(class_of(s.kind))));
        emit(std::move(i));
        break;
      }
      case StmtKind::ArrayDecl:
        throw Error("internal: local array");
      case StmtKind::Assign:
      case StmtKind::NondetAssign: {
        Instr i = make(Op::Assign, s);
        i.slot = slot_of(s.name);
        i.expr = cexpr(s.expr);
        emit(std::move(i));
        break;
      }
      case StmtKind::CallAssign:
        throw Error("internal: call survived unwinding");
      case StmtKind::If: {
        Instr i = make(Op::Branch, s);
        i.expr = cexpr(s.expr);
        int br = emit(std::move(i));
        body(s.body);
        if (s.has_else) {
          Instr j;
          j.op = Op::Jump;
          j.stmt = &s;
          int jmp = emit(std::move(j));
          fn_->code[br].target = here();
          body(s.else_body);
          fn_->code[jmp].target = here();
        } else {
          fn_->code[br].target = here();
        }
        break;
      }
      case StmtKind::While: {
        int id = fn_->loop_count++;
        fn_->loop_of[&s] = id;
        Instr enter;
        enter.op = Op::LoopEnter;
        enter.stmt = &s;
        enter.loop = id;
        emit(std::move(enter));
        Instr c = make(Op::WhileCond, s);
        c.expr = cexpr(s.expr);
        c.loop = id;
        int head = emit(std::move(c));
        body(s.body);
        Instr j;
        j.op = Op::Jump;
        j.stmt = &s;
        j.target = head;
        emit(std::move(j));
        fn_->code[head].target = here();
        break;
      }
      case StmtKind::For: {
        Instr init = make(Op::Assign, s);
        init.slot = slot_of(s.name);
        init.expr = cexpr(s.expr);
        emit(std::move(init));
        Instr c = make(Op::Branch, s);
        c.expr = cexpr(s.cond);
        int head = emit(std::move(c));
        body(s.body);
        Instr st = make(Op::Assign, s);
        st.slot = slot_of(s.name);
        st.expr = cexpr(s.step);
        emit(std::move(st));
        Instr j;
        j.op = Op::Jump;
        j.stmt = &s;
        j.target = head;
        emit(std::move(j));
        fn_->code[head].target = here();
        break;
      }
      case StmtKind::Switch: {
        Instr i = make(Op::Switch, s);
        i.expr = cexpr(s.expr);
        int sw = emit(std::move(i));
        switches_.push_back({sw, {}});
        body(s.body);
        int end = here();
        auto& ins = fn_->code[sw];
        ins.target = end;
        if (ins.default_target < 0) ins.default_target = end;
        for (int b : switches_.back().breaks) fn_->code[b].target = end;
        switches_.pop_back();
        break;
      }
      case StmtKind::Case:
        fn_->code[switches_.back().instr].cases.emplace_back(s.values.at(0), here());
        break;
      case StmtKind::Default:
        fn_->code[switches_.back().instr].default_target = here();
        break;
      case StmtKind::Break: {
        Instr j;
        j.op = Op::Jump;
        j.stmt = &s;
        switches_.back().breaks.push_back(emit(std::move(j)));
        break;
      }
      case StmtKind::Block:
        body(s.body);
        break;
      case StmtKind::Assert:
      case StmtKind::Assume: {
        Instr i = make(s.kind == StmtKind::Assert ? Op::Assert : Op::Assume, s);
        i.expr = cexpr(s.expr);
        emit(std::move(i));
        break;
      }
      case StmtKind::Return: {
        Instr i = make(Op::Return, s);
        if (s.expr) i.expr = cexpr(s.expr);
        else i.expr = cexpr(make_int(0));
        emit(std::move(i));
        break;
      }
      case StmtKind::ThreadCreate: {
        Instr i = make(Op::Create, s);
        i.slot = slot_of(s.name);
        for (std::size_t k = 0; k < p_.functions.size(); ++k)
          if (p_.functions[k].name == s.other) i.function = static_cast<int>(k);
        emit(std::move(i));
        break;
      }
      case StmtKind::ThreadJoin:
      case StmtKind::MutexLock:
      case StmtKind::MutexUnlock:
      case StmtKind::CondInit:
      case StmtKind::CondSignal: {
        static const std::map<StmtKind, Op> ops = {{StmtKind::ThreadJoin, Op::Join},
                                                   {StmtKind::MutexLock, Op::Lock},
                                                   {StmtKind::MutexUnlock, Op::Unlock},
                                                   {StmtKind::CondInit, Op::CondInit},
                                                   {StmtKind::CondSignal, Op::CondSignal}};
        Instr i = make(ops.at(s.kind), s);
        i.slot = slot_of(s.name);
        emit(std::move(i));
        break;
      }
      case StmtKind::ThreadExit:
        emit(make(Op::Exit, s));
        break;
      case StmtKind::CondWait: {
        Instr i = make(Op::CondWait, s);
        i.slot = slot_of(s.name);
        i.slot2 = slot_of(s.other);
        emit(std::move(i));
        break;
      }
    }
  }
};

Machine::Machine(const Program& program) : unwound_(detail::unwind(program)) {
  Compiler(*this, unwound_->program).run();
}

int Machine::function_index(const std::string& name) const {
  for (std::size_t i = 0; i < functions_.size(); ++i)
    if (functions_[i].name == name) return static_cast<int>(i);
  return -1;
}

void Machine::normalize(ThreadState& t) const {
  const auto& code = functions_[t.function].code;
  for (;;) {
    const Instr& i = code[t.pc];
    if (i.op == Op::Jump) {
      t.pc = i.target;
    } else if (i.op == Op::LoopEnter) {
      t.loops[i.loop] = 0;
      ++t.pc;
    } else {
      break;
    }
  }
  if (code[t.pc].op == Op::End) t.status = Status::Done;
}

int Machine::spawn(State& s, int function) const {
  ThreadState t;
  t.function = function;
  t.locals = functions_[function].local_init;
  t.loops.assign(functions_[function].loop_count, 0);
  normalize(t);
  s.threads.push_back(std::move(t));
  return static_cast<int>(s.threads.size()) - 1;
}

State Machine::initial() const {
  State s;
  s.globals = global_init_;
  int main = function_index("main");
  if (main < 0) throw Error("program has no main function");
  spawn(s, main);
  return s;
}

Value Machine::cond_key(Slot slot, int thread) const {
  if (slot.global) return slot.index;
  return -1 - (static_cast<Value>(thread) << 20) - slot.index;
}

Value& Machine::ref(State& s, ThreadState& t, Slot slot) const {
  return slot.global ? s.globals[slot.index] : t.locals[slot.index];
}

bool Machine::enabled(const State& s, int thread) const {
  const ThreadState& t = s.threads[thread];
  auto read = [&](Slot sl) { return sl.global ? s.globals[sl.index] : t.locals[sl.index]; };
  switch (t.status) {
    case Status::Done:
    case Status::WaitCond:
      return false;
    case Status::Reacquire:
      return read(current(s, thread).slot2) == 0;
    case Status::Run:
      break;
  }
  const Instr& i = current(s, thread);
  if (i.op == Op::Lock) return read(i.slot) == 0;
  if (i.op == Op::Join) {
    Value h = read(i.slot);
    if (h < 0 || h >= static_cast<Value>(s.threads.size())) return true;
    return s.threads[static_cast<std::size_t>(h)].status == Status::Done;
  }
  return true;
}

bool Machine::all_done(const State& s) const {
  for (const auto& t : s.threads)
    if (t.status != Status::Done) return false;
  return true;
}

bool Machine::any_enabled(const State& s) const {
  for (std::size_t i = 0; i < s.threads.size(); ++i)
    if (enabled(s, static_cast<int>(i))) return true;
  return false;
}

std::vector<int> Machine::blocked_threads(const State& s) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < s.threads.size(); ++i)
    if (s.threads[i].status != Status::Done && !enabled(s, static_cast<int>(i))) out.push_back(static_cast<int>(i));
  return out;
}

Value Machine::eval(const CExpr& e, const State& s, const ThreadState& t, const ChoiceFn& choose, LineId line) const {
  switch (e.kind) {
    case ExprKind::Int:
      return e.value;
    case ExprKind::Var:
      return e.slot.global ? s.globals[e.slot.index] : t.locals[e.slot.index];
    case ExprKind::Index: {
      Value i = eval(e.ops[0], s, t, choose, line);
      // Out-of-range reads are clamped into the array; the language has no
      // bounds-violation notion.
      if (e.array->empty()) return 0;
      auto n = static_cast<Value>(e.array->size());
      Value k = ((i % n) + n) % n;
      return (*e.array)[static_cast<std::size_t>(k)];
    }
    case ExprKind::Nondet:
      return choose(NondetRequest{e.has_range, e.lo, e.hi, line});
    case ExprKind::Unary: {
      Value v = eval(e.ops[0], s, t, choose, line);
      return e.unary_op == UnaryOp::Neg ? wrap_sub(0, v) : static_cast<Value>(v == 0);
    }
    case ExprKind::Ternary:
      return eval(e.ops[0], s, t, choose, line) != 0 ? eval(e.ops[1], s, t, choose, line)
                                                      : eval(e.ops[2], s, t, choose, line);
    case ExprKind::Binary:
      break;
  }
  if (e.binary_op == BinaryOp::And)
    return eval(e.ops[0], s, t, choose, line) != 0 && eval(e.ops[1], s, t, choose, line) != 0;
  if (e.binary_op == BinaryOp::Or)
    return eval(e.ops[0], s, t, choose, line) != 0 || eval(e.ops[1], s, t, choose, line) != 0;
  Value a = eval(e.ops[0], s, t, choose, line);
  Value b = eval(e.ops[1], s, t, choose, line);
  switch (e.binary_op) {
    case BinaryOp::Add: return wrap_add(a, b);
    case BinaryOp::Sub: return wrap_sub(a, b);
    case BinaryOp::Mul: return wrap_mul(a, b);
    case BinaryOp::Div:
      if (b == 0) throw DivByZero{};
      if (a == std::numeric_limits<Value>::min() && b == -1) return a;
      return a / b;
    case BinaryOp::Mod:
      if (b == 0) throw DivByZero{};
      if (b == -1) return 0;
      return a % b;
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    default: return 0;
  }
}

StepResult Machine::step(State& s, int thread, int loop_bound, bool div_check, const ChoiceFn& choose) const {
  StepResult r;
  const Instr& i = current(s, thread);
  r.instr = &i;
  LineId line = i.stmt ? i.stmt->line : LineId{};
  auto ev = [&](const CExpr& e) { return eval(e, s, s.threads[thread], choose, line); };
  try {
    ThreadState* t = &s.threads[thread];
    switch (i.op) {
      case Op::Decl:
      case Op::Assign: {
        Value v = ev(i.expr);
        ref(s, *t, i.slot) = v;
        ++t->pc;
        break;
      }
      case Op::Branch:
        r.branch = ev(i.expr) != 0;
        t->pc = r.branch ? t->pc + 1 : i.target;
        break;
      case Op::WhileCond:
        r.branch = ev(i.expr) != 0;
        if (r.branch) {
          if (t->loops[i.loop] >= loop_bound) {
            r.outcome = StepOutcome::Cut;
            r.bound_hit = true;
            return r;
          }
          ++t->loops[i.loop];
          ++t->pc;
        } else {
          t->loops[i.loop] = 0;
          t->pc = i.target;
        }
        break;
      case Op::Switch: {
        Value v = ev(i.expr);
        int dest = i.default_target;
        for (const auto& [cv, target] : i.cases)
          if (cv == v) {
            dest = target;
            break;
          }
        t->pc = dest;
        break;
      }
      case Op::Assert:
        if (ev(i.expr) == 0) {
          r.outcome = StepOutcome::AssertFail;
          return r;
        }
        ++t->pc;
        break;
      case Op::Assume:
        if (ev(i.expr) == 0) {
          r.outcome = StepOutcome::Cut;
          return r;
        }
        ++t->pc;
        break;
      case Op::Return:
        ev(i.expr);
        t->pc = i.target;
        break;
      case Op::Exit:
        t->pc = i.target;
        break;
      case Op::Create: {
        ++t->pc;
        int id = spawn(s, i.function);
        t = &s.threads[thread];
        ref(s, *t, i.slot) = id;
        break;
      }
      case Op::Join:
      case Op::CondInit:
      case Op::Nop:
        ++t->pc;
        break;
      case Op::Lock:
        ref(s, *t, i.slot) = thread + 1;
        ++t->pc;
        break;
      case Op::Unlock:
        ref(s, *t, i.slot) = 0;
        ++t->pc;
        break;
      case Op::CondWait:
        if (t->status == Status::Run) {
          ref(s, *t, i.slot2) = 0;
          t->status = Status::WaitCond;
          t->wait_cond = cond_key(i.slot, thread);
        } else {
          ref(s, *t, i.slot2) = thread + 1;
          t->status = Status::Run;
          ++t->pc;
        }
        break;
      case Op::CondSignal: {
        Value key = cond_key(i.slot, thread);
        for (auto& other : s.threads)
          if (other.status == Status::WaitCond && other.wait_cond == key) {
            other.status = Status::Reacquire;
            break;
          }
        ++t->pc;
        break;
      }
      case Op::Jump:
      case Op::LoopEnter:
      case Op::End:
        throw Error("internal: stepping a non-step instruction");
    }
    normalize(s.threads[thread]);
  } catch (const DivByZero&) {
    if (div_check) {
      r.outcome = StepOutcome::DivByZero;
    } else {
      r.outcome = StepOutcome::Cut;
      r.div_cut = true;
    }
  }
  return r;
}

std::map<std::string, Value> Machine::globals_valuation(const State& s) const {
  std::map<std::string, Value> out;
  for (std::size_t i = 0; i < global_names_.size(); ++i) {
    if (global_classes_[i] == VarClass::Int) out[global_names_[i]] = s.globals[i];
    if (global_classes_[i] == VarClass::Mutex) out[global_names_[i]] = s.globals[i] != 0;
  }
  return out;
}

std::map<std::string, Value> Machine::valuation(const State& s, int thread) const {
  auto out = globals_valuation(s);
  const ThreadState& t = s.threads[thread];
  const CompiledFunction& f = functions_[t.function];
  for (std::size_t i = 0; i < f.local_names.size(); ++i)
    if (f.local_classes[i] == VarClass::Int) out[f.local_names[i]] = t.locals[i];
  return out;
}

std::string State::key() const {
  std::string k;
  auto put = [&](const void* p, std::size_t n) { k.append(static_cast<const char*>(p), n); };
  auto put_int = [&](std::int64_t v) { put(&v, sizeof v); };
  put_int(last);
  put_int(static_cast<std::int64_t>(globals.size()));
  put(globals.data(), globals.size() * sizeof(Value));
  for (const auto& t : threads) {
    put_int((static_cast<std::int64_t>(t.function) << 40) | (static_cast<std::int64_t>(t.status) << 32) | t.pc);
    if (t.status == Status::WaitCond) put_int(t.wait_cond);
    if (t.status == Status::Done) continue;
    put(t.locals.data(), t.locals.size() * sizeof(Value));
    put(t.loops.data(), t.loops.size() * sizeof(int));
  }
  return k;
}

}  // namespace mcfl
