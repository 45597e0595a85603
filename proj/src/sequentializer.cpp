// SPDX-License-Identifier: Apache-2.0

#include "mcfl/sequentializer.hpp"

#include <limits>
#include <set>
#include <tuple>

#include "mcfl/error.hpp"
#include "mcfl/machine.hpp"
#include "mcfl/parser.hpp"

namespace mcfl {

bool is_reserved_name(const std::string& name) {
  return name == "order" || name == "order_index" || name == "diag" || name.rfind("loopcounter_", 0) == 0;
}

std::vector<Stmt> apply_pthread_rules(const Stmt& stmt, bool deadlock) {
  auto model = [&](StmtKind kind, ExprPtr value) {
    Stmt s = make_stmt(kind, stmt.name, std::move(value));
    s.line = stmt.line;
    return std::vector<Stmt>{s};
  };
  switch (stmt.kind) {
    case StmtKind::VarDecl:
    case StmtKind::ArrayDecl:
    case StmtKind::Assign:
    case StmtKind::NondetAssign:
    case StmtKind::CallAssign:
    case StmtKind::If:
    case StmtKind::While:
    case StmtKind::Block:
    case StmtKind::Assert:
    case StmtKind::Assume:
    case StmtKind::Return:
      return {stmt};
    case StmtKind::ThreadDecl:
    case StmtKind::AttrDecl:
    case StmtKind::CondAttrDecl:
    case StmtKind::ThreadCreate:
    case StmtKind::ThreadJoin:
    case StmtKind::ThreadExit:
      return {};
    case StmtKind::MutexDecl:
      return deadlock ? model(StmtKind::VarDecl, nullptr) : std::vector<Stmt>{};
    case StmtKind::MutexLock:
      return deadlock ? model(StmtKind::Assign, make_int(1)) : std::vector<Stmt>{};
    case StmtKind::MutexUnlock:
      return deadlock ? model(StmtKind::Assign, make_int(0)) : std::vector<Stmt>{};
    case StmtKind::CondDecl:
      return deadlock ? model(StmtKind::VarDecl, nullptr) : std::vector<Stmt>{};
    case StmtKind::CondInit:
      return deadlock ? model(StmtKind::Assign, make_int(0)) : std::vector<Stmt>{};
    case StmtKind::CondWait:
      return deadlock ? model(StmtKind::Assign, make_int(1)) : std::vector<Stmt>{};
    case StmtKind::CondSignal:
      return deadlock ? model(StmtKind::Assign, make_int(0)) : std::vector<Stmt>{};
    case StmtKind::For:
    case StmtKind::Switch:
    case StmtKind::Case:
    case StmtKind::Default:
    case StmtKind::Break:
      break;
  }
  throw RuleGap(std::string("no transformation rule for ") + kind_name(stmt.kind) + " (statement " +
                std::to_string(stmt.line.value) + ")");
}

namespace {

Synthetic model_reason(StmtKind k) {
  switch (k) {
    case StmtKind::MutexDecl:
    case StmtKind::MutexLock:
    case StmtKind::MutexUnlock:
      return Synthetic::MutexModel;
    default:
      return Synthetic::CondModel;
  }
}

void require_supported(const Program& p) {
  auto reserved = [&](const std::string& n, LineId line) {
    if (is_reserved_name(n))
      throw RuleGap("identifier '" + n + "' (statement " + std::to_string(line.value) +
                    ") is reserved by the sequential framework");
  };
  for (const auto& f : p.functions) {
    reserved(f.name, LineId{});
    for (const auto& prm : f.params) reserved(prm, LineId{});
  }
  for_each_stmt(p, [&](const Stmt& s) {
    switch (s.kind) {
      case StmtKind::For:
      case StmtKind::Switch:
      case StmtKind::Case:
      case StmtKind::Default:
      case StmtKind::Break:
        throw RuleGap(std::string(kind_name(s.kind)) + " at statement " + std::to_string(s.line.value) +
                      " cannot be sequentialized");
      default:
        break;
    }
    if (is_declaration_kind(s.kind)) reserved(s.name, s.line);
    bool nested_nondet = false;
    for (const ExprPtr* e : {&s.expr, &s.cond, &s.step})
      if (*e && contains_nondet(**e) && s.kind != StmtKind::NondetAssign) nested_nondet = true;
    for (const auto& a : s.args)
      if (contains_nondet(*a)) nested_nondet = true;
    if (nested_nondet)
      throw RuleGap("nondet() inside an expression at statement " + std::to_string(s.line.value) +
                    " cannot be pinned; use `x = nondet();`");
  });
}

enum PosKind { kAfter = 0, kBody = 1, kElse = 2 };
using PosKey = std::tuple<int, int, const Stmt*>;  // thread, kind, unwound statement

struct Boundary {
  PosKey pos;
  const Stmt* loop = nullptr;
  int count = 0;
};

struct NondetRecord {
  int thread;
  const Stmt* stmt;
  const Stmt* loop;
  int count;
  Value value;
};

class SkeletonBuilder {
 public:
  SkeletonBuilder(const Program& p, const Schedule& s, bool deadlock)
      : program_(p), schedule_(s), deadlock_(deadlock), machine_(p), unwound_(machine_.unwound()) {}

  Skeleton run() {
    require_supported(program_);
    index_loops();
    replay();
    Program out = build();
    auto remap = renumber(out);
    Skeleton sk;
    for (const auto& [old_line, new_line] : remap) sk.seq.line_map[new_line] = origins_.at(temp_index(old_line));
    sk.seq.program = std::move(out);
    sk.plan = plan(remap);
    return sk;
  }

 private:
  const Program& program_;
  const Schedule& schedule_;
  bool deadlock_;
  Machine machine_;
  const detail::Unwound& unwound_;

  std::map<const Stmt*, const Stmt*> enclosing_loop_;
  std::vector<int> instance_function_;  // thread ordinal -> function index
  std::vector<Boundary> boundaries_;    // one per segment
  std::vector<NondetRecord> nondets_;

  std::vector<LineOrigin> origins_;  // temp LineId -(k+1) -> origin
  std::map<PosKey, Anchor> anchors_;
  std::map<std::pair<int, const Stmt*>, LineId> image_;  // (thread, whiles / nondet assigns) -> temp line
  std::set<std::string> names_;
  std::map<std::string, std::string> rename_;

  LineId temp(LineOrigin o) {
    origins_.push_back(o);
    return LineId{-static_cast<int>(origins_.size())};
  }
  static std::size_t temp_index(LineId l) { return static_cast<std::size_t>(-l.value - 1); }

  void index_loops() {
    std::function<void(const std::vector<Stmt>&, const Stmt*)> walk = [&](const std::vector<Stmt>& b,
                                                                           const Stmt* loop) {
      for (const auto& s : b) {
        enclosing_loop_[&s] = loop;
        const Stmt* inner = s.kind == StmtKind::While ? &s : loop;
        walk(s.body, inner);
        walk(s.else_body, inner);
      }
    };
    for (const auto& f : unwound_.program.functions) walk(f.body, nullptr);
  }

  void replay() {
    State st = machine_.initial();
    std::map<std::pair<int, const Stmt*>, int> started;  // while iterations begun, whole run
    std::size_t next_choice = 0;
    const int unbounded = std::numeric_limits<int>::max();
    for (const auto& seg : schedule_.segments) {
      StepResult r;
      for (int k = 0; k < seg.step_count; ++k) {
        if (seg.thread >= static_cast<int>(st.threads.size()) || !machine_.enabled(st, seg.thread))
          throw TraceMismatch("schedule runs thread " + std::to_string(seg.thread) + " when it cannot move");
        Value drawn = 0;
        auto choose = [&](const NondetRequest& q) {
          if (next_choice >= schedule_.nondet_choices.size())
            throw TraceMismatch("schedule runs out of nondet choices");
          const auto& [line, v] = schedule_.nondet_choices[next_choice++];
          if (line != q.line) throw TraceMismatch("nondet choice does not match line " + std::to_string(q.line.value));
          drawn = v;
          return v;
        };
        r = machine_.step(st, seg.thread, unbounded, true, choose);
        if (r.outcome == StepOutcome::Cut) throw TraceMismatch("schedule follows an infeasible path");
        const Stmt* s = r.instr->stmt;
        if (r.instr->op == Op::WhileCond && r.branch) ++started[{seg.thread, s}];
        if (s->kind == StmtKind::NondetAssign) {
          const Stmt* loop = enclosing_loop_.at(s);
          int count = loop ? started[{seg.thread, loop}] - 1 : 0;
          nondets_.push_back({seg.thread, s, loop, count, drawn});
        }
      }
      if (seg.step_count == 0) throw TraceMismatch("empty segment in schedule");
      const Stmt* s = r.instr->stmt;
      Boundary b;
      if (r.instr->op == Op::Branch)
        b.pos = {seg.thread, r.branch ? kBody : (s->has_else ? kElse : kAfter), s};
      else if (r.instr->op == Op::WhileCond)
        b.pos = {seg.thread, r.branch ? kBody : kAfter, s};
      else
        b.pos = {seg.thread, kAfter, s};
      const Stmt* loop = (std::get<1>(b.pos) == kBody && s->kind == StmtKind::While) ? s : enclosing_loop_.at(s);
      if (loop) {
        b.loop = loop;
        b.count = started[{seg.thread, loop}] - 1;
      }
      boundaries_.push_back(b);
    }
    for (const auto& t : st.threads) instance_function_.push_back(t.function);
  }

  LineOrigin origin_of(const Stmt& u) const {
    switch (unwound_.role_of(&u)) {
      case detail::UnwindRole::Plain:
      case detail::UnwindRole::CallBlock:
        return LineOrigin::original(u.line);
      default:
        return LineOrigin::unwind_copy(u.line);
    }
  }

  std::string ren(const std::string& n) const {
    auto it = rename_.find(n);
    return it == rename_.end() ? n : it->second;
  }

  Stmt shallow_copy(const Stmt& u) const {
    Stmt s;
    s.kind = u.kind;
    s.name = (u.kind == StmtKind::Case || u.kind == StmtKind::Default) ? u.name : ren(u.name);
    s.other = u.kind == StmtKind::CondWait ? ren(u.other) : u.other;
    auto r = [&](const std::string& n) { return ren(n); };
    s.expr = rename_vars(u.expr, r);
    s.cond = rename_vars(u.cond, r);
    s.step = rename_vars(u.step, r);
    for (const auto& a : u.args) s.args.push_back(rename_vars(a, r));
    s.values = u.values;
    s.has_else = u.has_else;
    return s;
  }

  void body(const std::vector<Stmt>& in, std::vector<Stmt>& out, int n, Anchor start) {
    Anchor cur = start;
    for (const auto& u : in) {
      std::vector<Stmt> images = stmt(u, n);
      if (!images.empty()) cur = Anchor{AnchorKind::After, images.back().line};
      anchors_[{n, kAfter, &u}] = cur;
      for (auto& x : images) out.push_back(std::move(x));
    }
  }

  std::vector<Stmt> stmt(const Stmt& u, int n) {
    if (u.kind == StmtKind::Return) return {};
    if (is_pthread_kind(u.kind)) {
      std::vector<Stmt> out = apply_pthread_rules(shallow_copy(u), deadlock_);
      for (auto& s : out) s.line = temp(LineOrigin::synthetic(model_reason(u.kind)));
      return out;
    }
    Stmt s = shallow_copy(u);
    s.line = temp(origin_of(u));
    switch (u.kind) {
      case StmtKind::If:
        anchors_[{n, kBody, &u}] = {AnchorKind::StartOfBody, s.line};
        body(u.body, s.body, n, {AnchorKind::StartOfBody, s.line});
        if (u.has_else) {
          anchors_[{n, kElse, &u}] = {AnchorKind::StartOfElse, s.line};
          body(u.else_body, s.else_body, n, {AnchorKind::StartOfElse, s.line});
        }
        break;
      case StmtKind::While:
        image_[{n, &u}] = s.line;
        anchors_[{n, kBody, &u}] = {AnchorKind::StartOfBody, s.line};
        body(u.body, s.body, n, {AnchorKind::StartOfBody, s.line});
        break;
      case StmtKind::Block:
        body(u.body, s.body, n, {AnchorKind::StartOfBody, s.line});
        break;
      case StmtKind::NondetAssign:
        image_[{n, &u}] = s.line;
        break;
      case StmtKind::VarDecl:
      case StmtKind::Assign:
      case StmtKind::Assert:
      case StmtKind::Assume:
        break;
      default:
        apply_pthread_rules(u, deadlock_);  // throws RuleGap
        break;
    }
    return {s};
  }

  Stmt framework(Stmt s) {
    s.line = temp(LineOrigin::synthetic(Synthetic::Framework));
    return s;
  }

  std::string fresh(const std::string& base) {
    std::string n = base;
    for (int k = 2; names_.count(n); ++k) n = base + "_" + std::to_string(k);
    names_.insert(n);
    return n;
  }

  Stmt thread_case(int n, int function) {
    const CompiledFunction& cf = machine_.functions()[function];
    rename_.clear();
    if (n > 0)
      for (const auto& local : cf.local_names) rename_[local] = fresh(local + "_t" + std::to_string(n));
    Stmt block = framework(make_block({}));
    block.body.push_back(framework(make_case(order_tag(n, 1))));
    const FunctionDef& f = unwound_.program.functions[static_cast<std::size_t>(function)];
    body(f.body, block.body, n, {AnchorKind::StartOfBody, block.line});
    return block;
  }

  Program build() {
    for_each_stmt(unwound_.program, [&](const Stmt& s) {
      if (is_declaration_kind(s.kind)) names_.insert(s.name);
    });
    for (const auto& f : unwound_.program.functions) names_.insert(f.name);

    Program out;
    for (const auto& g : unwound_.program.globals) {
      rename_.clear();
      for (auto& s : stmt(g, -1)) out.globals.push_back(std::move(s));
    }
    Stmt order = make_stmt(StmtKind::ArrayDecl, "order");
    order.values.assign(schedule_.order_tags.begin(), schedule_.order_tags.end());
    out.globals.push_back(framework(order));

    // Thread instances from the trace, then create targets never started.
    std::vector<int> cases = instance_function_;
    std::set<int> started(cases.begin(), cases.end());
    for (const auto& name : unwound_.program.thread_functions()) {
      int f = machine_.function_index(name);
      if (!started.count(f)) {
        cases.push_back(f);
        started.insert(f);
      }
    }
    if (cases.size() >= 10) throw UnsupportedSchedule("ten or more thread bodies do not fit the case numbering");

    Stmt sw = framework(make_stmt(StmtKind::Switch, {}, make_index("order", make_var("order_index"))));
    for (std::size_t n = 0; n < cases.size(); ++n) {
      sw.body.push_back(framework(make_case(static_cast<Value>(n) + 1)));
      sw.body.push_back(thread_case(static_cast<int>(n), cases[n]));
      sw.body.push_back(framework(make_stmt(StmtKind::Break)));
    }
    sw.body.push_back(framework(make_stmt(StmtKind::Default)));
    sw.body.push_back(framework(make_stmt(StmtKind::Break)));

    auto k = static_cast<Value>(schedule_.order_tags.size());
    Stmt loop = make_stmt(StmtKind::For, "order_index", make_int(0));
    loop.cond = make_binary(BinaryOp::Lt, make_var("order_index"), make_int(k));
    loop.step = make_binary(BinaryOp::Add, make_var("order_index"), make_int(1));
    loop = framework(loop);
    loop.body.push_back(std::move(sw));

    FunctionDef main;
    main.name = "main";
    main.returns_value = true;
    main.body.push_back(framework(make_stmt(StmtKind::VarDecl, "order_index")));
    main.body.push_back(std::move(loop));
    main.body.push_back(framework(make_stmt(StmtKind::Return, {}, make_int(1))));
    out.functions.push_back(std::move(main));
    return out;
  }

  OrderPlan plan(const std::map<LineId, LineId>& remap) {
    auto fin = [&](LineId temp_line) { return remap.at(temp_line); };
    auto anchor = [&](const PosKey& k) {
      auto it = anchors_.find(k);
      if (it == anchors_.end()) throw GuardPlacementError("switch point has no image in the sequential program");
      return Anchor{it->second.kind, fin(it->second.line)};
    };
    OrderPlan p;
    const auto& segs = schedule_.segments;
    std::map<int, int> previous;  // thread -> index of its latest segment
    for (std::size_t i = 0; i < segs.size(); ++i) {
      int t = segs[i].thread;
      auto prev = previous.find(t);
      if (prev != previous.end()) {
        PlanItem label;
        label.at = anchor(boundaries_[prev->second].pos);
        label.time = 2 * prev->second + 1;
        label.label = true;
        label.tag = segs[i].tag;
        p.items.push_back(label);
      }
      previous[t] = static_cast<int>(i);
      if (i + 1 < segs.size() || deadlock_) {
        const Boundary& b = boundaries_[i];
        PlanItem guard;
        guard.at = anchor(b.pos);
        guard.time = 2 * static_cast<int>(i);
        guard.tag = segs[i].tag;
        if (b.loop) guard.loop = GuardLoop{fin(image_.at({t, b.loop})), b.count};
        p.items.push_back(guard);
      }
    }
    std::map<std::pair<int, const Stmt*>, std::size_t> pin_of;
    for (const auto& r : nondets_) {
      auto key = std::make_pair(r.thread, r.stmt);
      auto it = pin_of.find(key);
      if (it == pin_of.end()) {
        Pin pin;
        pin.assign = fin(image_.at(key));
        if (r.loop) pin.loop = fin(image_.at({r.thread, r.loop}));
        it = pin_of.emplace(key, p.pins.size()).first;
        p.pins.push_back(pin);
      }
      p.pins[it->second].values.emplace_back(r.count, r.value);
    }
    return p;
  }
};

class Injector {
 public:
  Injector(const SequentialProgram& sk, const OrderPlan& plan) : sk_(sk), plan_(plan) {}

  SequentialProgram run() {
    Program out = sk_.program;
    for (const auto& item : plan_.items) {
      items_[item.at].push_back(&item);
      if (item.loop) counter_name(item.loop->loop);
    }
    for (auto& [a, v] : items_)
      std::stable_sort(v.begin(), v.end(), [](const PlanItem* x, const PlanItem* y) { return x->time < y->time; });
    for (const auto& pin : plan_.pins) {
      pins_[pin.assign] = &pin;
      if (pin.loop.valid() && pin.values.size() > 1) counter_name(pin.loop);
    }
    // Counters numbered in program order of their loops.
    int k = 0;
    for (auto& [loop, name] : counters_) name = "loopcounter_" + std::to_string(++k);

    for (auto& f : out.functions) rebuild(f.body, std::nullopt, nullptr);
    if (!items_.empty()) {
      auto first = items_.begin()->first;
      throw GuardPlacementError("no anchor at statement " + std::to_string(first.line.value));
    }
    if (!pins_.empty()) throw GuardPlacementError("pinned nondet assignment not found");

    std::vector<Stmt> globals;
    for (auto& g : out.globals) {
      bool is_order = g.kind == StmtKind::ArrayDecl && g.name == "order";
      globals.push_back(std::move(g));
      if (is_order)
        for (const auto& [loop, name] : counters_)
          globals.push_back(added(make_stmt(StmtKind::VarDecl, name, make_int(0)), Synthetic::Loopcounter));
    }
    out.globals = std::move(globals);

    auto remap = renumber(out);
    SequentialProgram seq;
    for (const auto& [old_line, new_line] : remap)
      seq.line_map[new_line] = old_line.value > 0 ? sk_.line_map.at(old_line) : added_.at(static_cast<std::size_t>(-old_line.value - 1));
    seq.program = std::move(out);
    check(seq.program);
    return seq;
  }

 private:
  const SequentialProgram& sk_;
  const OrderPlan& plan_;
  std::map<Anchor, std::vector<const PlanItem*>> items_;
  std::map<LineId, const Pin*> pins_;
  std::map<LineId, std::string> counters_;
  std::vector<LineOrigin> added_;

  void counter_name(LineId loop) { counters_.try_emplace(loop, std::string()); }

  Stmt added(Stmt s, LineOrigin o) {
    added_.push_back(o);
    s.line = LineId{-static_cast<int>(added_.size())};
    return s;
  }
  Stmt added(Stmt s, Synthetic k) { return added(std::move(s), LineOrigin::synthetic(k)); }

  ExprPtr order_is(int tag) const {
    return make_binary(BinaryOp::Eq, make_index("order", make_var("order_index")), make_int(tag));
  }

  void emit_items(const Anchor& at, std::vector<Stmt>& out) {
    auto it = items_.find(at);
    if (it == items_.end()) return;
    for (const PlanItem* item : it->second) {
      if (item->label) {
        out.push_back(added(make_case(item->tag), Synthetic::OrderControl));
        continue;
      }
      ExprPtr cond = order_is(item->tag);
      if (item->loop)
        cond = make_binary(BinaryOp::And, cond,
                           make_binary(BinaryOp::Eq, make_var(counters_.at(item->loop->loop)),
                                       make_int(item->loop->count)));
      Stmt brk = added(make_stmt(StmtKind::Break), Synthetic::OrderControl);
      out.push_back(added(make_if(cond, {brk}), Synthetic::OrderControl));
    }
    items_.erase(it);
  }

  Stmt pin_stmt(const Stmt& assign, const Pin& pin) {
    ExprPtr v = make_int(pin.values.back().second);
    if (pin.values.size() > 1) {
      const std::string& lc = counters_.at(pin.loop);
      for (std::size_t i = pin.values.size() - 1; i-- > 0;)
        v = make_ternary(make_binary(BinaryOp::Eq, make_var(lc), make_int(pin.values[i].first)),
                         make_int(pin.values[i].second), v);
    }
    LineOrigin o{Synthetic::OrderControl, sk_.line_map.at(assign.line).source_line()};
    return added(make_stmt(StmtKind::Assume, {}, make_binary(BinaryOp::Eq, make_var(assign.name), v)), o);
  }

  void rebuild(std::vector<Stmt>& body, std::optional<Anchor> start, const Stmt* block) {
    std::vector<Stmt> out;
    std::size_t i = 0;
    if (block && block->kind == StmtKind::Block)
      while (i < body.size() && body[i].kind == StmtKind::Case) out.push_back(std::move(body[i++]));
    if (start) emit_items(*start, out);
    for (; i < body.size(); ++i) {
      Stmt& s = body[i];
      LineId line = s.line;
      if (s.kind == StmtKind::If) {
        rebuild(s.body, Anchor{AnchorKind::StartOfBody, line}, &s);
        if (s.has_else) rebuild(s.else_body, Anchor{AnchorKind::StartOfElse, line}, &s);
      } else if (!s.body.empty() || s.kind == StmtKind::While || s.kind == StmtKind::Block) {
        rebuild(s.body, Anchor{AnchorKind::StartOfBody, line}, &s);
      }
      if (s.kind == StmtKind::While) {
        auto c = counters_.find(line);
        if (c != counters_.end())
          s.body.push_back(added(make_stmt(StmtKind::Assign, c->second,
                                           make_binary(BinaryOp::Add, make_var(c->second), make_int(1))),
                                 Synthetic::Loopcounter));
      }
      const Pin* pin = nullptr;
      if (auto p = pins_.find(line); p != pins_.end()) {
        pin = p->second;
        pins_.erase(p);
      }
      out.push_back(std::move(s));
      if (pin) out.push_back(pin_stmt(out.back(), *pin));
      emit_items(Anchor{AnchorKind::After, line}, out);
    }
    body = std::move(out);
  }
};

}  // namespace

Skeleton build_skeleton(const Program& program, const Schedule& schedule, bool deadlock) {
  return SkeletonBuilder(program, schedule, deadlock).run();
}

SequentialProgram inject_order_control(const SequentialProgram& skeleton, const OrderPlan& plan) {
  return Injector(skeleton, plan).run();
}

SequentialProgram sequentialize(const Program& program, const Schedule& schedule, bool deadlock) {
  Skeleton sk = build_skeleton(program, schedule, deadlock);
  return inject_order_control(sk.seq, sk.plan);
}

}  // namespace mcfl
