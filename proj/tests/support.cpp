// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mcfl::testing {

namespace {

class Gen {
 public:
  Gen(std::mt19937& rng, const GenOptions& o) : rng_(rng), o_(o) {}

  std::string program() {
    std::ostringstream out;
    int shared = pick(1, o_.shared);
    for (int i = 0; i < shared; ++i) globals_.push_back("g" + std::to_string(i));
    for (const auto& g : globals_) out << "int " << g << ";\n";
    if (o_.mutex) out << "pthread_mutex_t m;\n";
    int workers = pick(1, o_.max_threads - 1);
    for (int w = 1; w <= workers; ++w) {
      out << "\nvoid w" << w << "() {\n  int l;\n";
      int budget = pick(2, o_.max_stmts) - 1;
      while (budget > 0) out << stmt(budget, "  ");
      out << "}\n";
    }
    out << "\nint main() {\n";
    for (int w = 1; w <= workers; ++w) out << "  pthread_t t" << w << ";\n";
    if (workers == 1 && chance(2)) out << "  " << globals_[0] << " = " << pick(0, 3) << ";\n";
    for (int w = 1; w <= workers; ++w) out << "  pthread_create(t" << w << ", w" << w << ");\n";
    for (int w = 1; w <= workers; ++w) out << "  pthread_join(t" << w << ");\n";
    out << "  assert(" << global_cond() << ");\n  return 0;\n}\n";
    return out.str();
  }

 private:
  std::mt19937& rng_;
  GenOptions o_;
  std::vector<std::string> globals_;

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int n) { return pick(1, n) == 1; }
  const std::string& global() { return globals_[static_cast<std::size_t>(pick(0, static_cast<int>(globals_.size()) - 1))]; }

  std::string atom() {
    switch (pick(0, 3)) {
      case 0: return std::to_string(pick(0, 3));
      case 1: return "l";
      default: return global();
    }
  }

  std::string expr() {
    if (chance(2)) return atom();
    static const char* ops[] = {" + ", " - ", " * "};
    if (o_.division && chance(4)) return atom() + (chance(2) ? " / " : " % ") + atom();
    return atom() + ops[pick(0, 2)] + atom();
  }

  std::string cond() {
    static const char* cmps[] = {" == ", " != ", " < ", " <= ", " > ", " >= "};
    return atom() + cmps[pick(0, 5)] + atom();
  }

  std::string global_cond() {
    static const char* cmps[] = {" == ", " != ", " < ", " <= ", " > ", " >= "};
    return global() + cmps[pick(0, 5)] + std::to_string(pick(0, 3));
  }

  std::string target() { return chance(3) ? std::string("l") : global(); }

  std::string simple(int& budget) {
    --budget;
    switch (pick(0, 5)) {
      case 0: return target() + " = nondet();";
      case 1: return "assert(" + cond() + ");";
      default: return target() + " = " + expr() + ";";
    }
  }

  std::string stmt(int& budget, const std::string& ind) {
    int kind = pick(0, 9);
    if (kind == 0 && budget >= 3 && o_.mutex) {
      std::string s = ind + "pthread_mutex_lock(m);\n";
      budget -= 2;
      s += ind + simple(budget) + "\n";
      return s + ind + "pthread_mutex_unlock(m);\n";
    }
    if (kind == 1 && budget >= 4 && o_.loops) {
      budget -= 4;
      std::string g = global();
      return ind + "l = 0;\n" + ind + "while (l < " + std::to_string(pick(1, 4)) + ") {\n" + ind + "  " + g +
             " = " + g + " + " + std::to_string(pick(1, 2)) + ";\n" + ind + "  l = l + 1;\n" + ind + "}\n";
    }
    if (kind <= 3 && budget >= 2) {
      --budget;
      std::string s = ind + "if (" + cond() + ") {\n" + ind + "  " + simple(budget) + "\n" + ind + "}";
      if (budget >= 1 && chance(2)) s += " else {\n" + ind + "  " + simple(budget) + "\n" + ind + "}";
      return s + "\n";
    }
    return ind + simple(budget) + "\n";
  }
};

// ---------------------------------------------------------------------------
// Naive oracle

struct Frame {
  const std::vector<Stmt>* body;
  std::size_t idx;
};

struct Thread {
  std::vector<Frame> frames;
  std::map<std::string, Value> locals;
  std::map<const Stmt*, int> loops;
  bool done() const { return frames.empty(); }
};

struct World {
  std::map<std::string, Value> globals;
  std::vector<Thread> threads;
  int last = -1;
  int switches = 0;
};

struct Violated {};
struct Cut {};

class Naive {
 public:
  Naive(const Program& p, const VerifierConfig& c) : p_(p), c_(c) {}

  NaiveResult run() {
    World w;
    for (const auto& g : p_.globals) {
      if (g.kind == StmtKind::VarDecl) w.globals[g.name] = g.expr ? g.expr->value : 0;
      if (g.kind == StmtKind::MutexDecl) w.globals[g.name] = 0;
      if (g.kind == StmtKind::ThreadDecl) w.globals[g.name] = -1;
    }
    spawn(w, p_.main());
    explore(w);
    return res_;
  }

 private:
  const Program& p_;
  VerifierConfig c_;
  NaiveResult res_;

  static void settle(Thread& t) {
    while (!t.frames.empty() && t.frames.back().idx >= t.frames.back().body->size()) t.frames.pop_back();
  }

  void spawn(World& w, const FunctionDef& f) {
    Thread t;
    t.frames.push_back({&f.body, 0});
    settle(t);
    w.threads.push_back(std::move(t));
  }

  const Stmt& current(const Thread& t) const { return (*t.frames.back().body)[t.frames.back().idx]; }

  Value& var(World& w, Thread& t, const std::string& n) {
    auto it = t.locals.find(n);
    if (it != t.locals.end()) return it->second;
    return w.globals.at(n);
  }

  bool enabled(World& w, int i) {
    Thread& t = w.threads[static_cast<std::size_t>(i)];
    if (t.done()) return false;
    const Stmt& s = current(t);
    if (s.kind == StmtKind::MutexLock) return var(w, t, s.name) == 0;
    if (s.kind == StmtKind::ThreadJoin) {
      Value h = var(w, t, s.name);
      if (h < 0 || h >= static_cast<Value>(w.threads.size())) return true;
      return w.threads[static_cast<std::size_t>(h)].done();
    }
    return true;
  }

  // Evaluates with the pending nondet values in `nd`; a Nondet pulls the
  // next one.
  Value eval(const Expr& e, World& w, Thread& t, const std::vector<Value>& nd, std::size_t& k) {
    switch (e.kind) {
      case ExprKind::Int: return e.value;
      case ExprKind::Var: return var(w, t, e.name);
      case ExprKind::Nondet: return nd.at(k++);
      case ExprKind::Unary: {
        Value v = eval(*e.operands[0], w, t, nd, k);
        return e.unary_op == UnaryOp::Neg ? -v : v == 0;
      }
      case ExprKind::Ternary:
        return eval(*e.operands[0], w, t, nd, k) ? eval(*e.operands[1], w, t, nd, k)
                                                  : eval(*e.operands[2], w, t, nd, k);
      case ExprKind::Index: throw std::logic_error("naive oracle: arrays not supported");
      case ExprKind::Binary: break;
    }
    if (e.binary_op == BinaryOp::And) return eval(*e.operands[0], w, t, nd, k) && eval(*e.operands[1], w, t, nd, k);
    if (e.binary_op == BinaryOp::Or) return eval(*e.operands[0], w, t, nd, k) || eval(*e.operands[1], w, t, nd, k);
    Value a = eval(*e.operands[0], w, t, nd, k);
    Value b = eval(*e.operands[1], w, t, nd, k);
    switch (e.binary_op) {
      case BinaryOp::Add: return a + b;
      case BinaryOp::Sub: return a - b;
      case BinaryOp::Mul: return a * b;
      case BinaryOp::Div:
      case BinaryOp::Mod:
        if (b == 0) {
          if (c_.div_by_zero_check) throw Violated{};
          throw Cut{};
        }
        return e.binary_op == BinaryOp::Div ? a / b : a % b;
      case BinaryOp::Eq: return a == b;
      case BinaryOp::Ne: return a != b;
      case BinaryOp::Lt: return a < b;
      case BinaryOp::Le: return a <= b;
      case BinaryOp::Gt: return a > b;
      case BinaryOp::Ge: return a >= b;
      default: return 0;
    }
  }

  static int nondet_count(const Expr& e) {
    int n = e.kind == ExprKind::Nondet ? 1 : 0;
    for (const auto& o : e.operands) n += nondet_count(*o);
    return n;
  }

  // One atomic statement of thread i.
  void exec(World& w, int i, const std::vector<Value>& nd) {
    Thread* t = &w.threads[static_cast<std::size_t>(i)];
    const Stmt& s = current(*t);
    Frame& f = t->frames.back();
    std::size_t k = 0;
    switch (s.kind) {
      case StmtKind::VarDecl:
        t->locals[s.name] = s.expr ? eval(*s.expr, w, *t, nd, k) : 0;
        ++f.idx;
        break;
      case StmtKind::ThreadDecl:
        t->locals[s.name] = -1;
        ++f.idx;
        break;
      case StmtKind::Assign:
      case StmtKind::NondetAssign: {
        Value v = eval(*s.expr, w, *t, nd, k);
        var(w, *t, s.name) = v;
        ++f.idx;
        break;
      }
      case StmtKind::If: {
        bool b = eval(*s.expr, w, *t, nd, k) != 0;
        ++f.idx;
        if (b) t->frames.push_back({&s.body, 0});
        else if (s.has_else) t->frames.push_back({&s.else_body, 0});
        break;
      }
      case StmtKind::While: {
        bool b = eval(*s.expr, w, *t, nd, k) != 0;
        if (b) {
          int& n = t->loops[&s];
          if (n >= c_.loop_bound) throw Cut{};
          ++n;
          t->frames.push_back({&s.body, 0});
        } else {
          t->loops[&s] = 0;
          ++f.idx;
        }
        break;
      }
      case StmtKind::Block:
        ++f.idx;
        t->frames.push_back({&s.body, 0});
        break;
      case StmtKind::Assert:
        if (eval(*s.expr, w, *t, nd, k) == 0) throw Violated{};
        ++f.idx;
        break;
      case StmtKind::Assume:
        if (eval(*s.expr, w, *t, nd, k) == 0) throw Cut{};
        ++f.idx;
        break;
      case StmtKind::Return:
        if (s.expr) eval(*s.expr, w, *t, nd, k);
        t->frames.clear();
        break;
      case StmtKind::ThreadCreate: {
        ++f.idx;
        Value id = static_cast<Value>(w.threads.size());
        var(w, *t, s.name) = id;
        spawn(w, *p_.find_function(s.other));
        t = &w.threads[static_cast<std::size_t>(i)];
        break;
      }
      case StmtKind::ThreadJoin:
        ++f.idx;
        break;
      case StmtKind::MutexLock:
        var(w, *t, s.name) = i + 1;
        ++f.idx;
        break;
      case StmtKind::MutexUnlock:
        var(w, *t, s.name) = 0;
        ++f.idx;
        break;
      default:
        throw std::logic_error(std::string("naive oracle: unsupported ") + kind_name(s.kind));
    }
    // A finished loop body pops back to its while statement, which is
    // evaluated again.
    settle(*t);
  }

  void explore(const World& w) {
    if (res_.violation) return;
    bool any = false;
    for (int i = 0; i < static_cast<int>(w.threads.size()); ++i) {
      World probe = w;
      if (!enabled(probe, i)) continue;
      any = true;
      int cost = (w.last >= 0 && w.last != i) ? 1 : 0;
      if (w.switches + cost > c_.context_bound) continue;
      const Stmt& s = current(w.threads[static_cast<std::size_t>(i)]);
      int n = s.expr ? nondet_count(*s.expr) : 0;
      std::vector<Value> nd(static_cast<std::size_t>(n), c_.nondet_lo);
      for (;;) {
        World next = w;
        bool stop = false;
        try {
          exec(next, i, nd);
        } catch (const Violated&) {
          res_.violation = true;
          return;
        } catch (const Cut&) {
          ++res_.paths;
          stop = true;
        }
        if (!stop) {
          next.switches += cost;
          next.last = i;
          explore(next);
          if (res_.violation) return;
        }
        std::size_t j = 0;
        for (; j < nd.size(); ++j) {
          if (nd[j] < c_.nondet_hi) {
            ++nd[j];
            break;
          }
          nd[j] = c_.nondet_lo;
        }
        if (j == nd.size()) break;
      }
    }
    if (!any) ++res_.paths;
  }
};

}  // namespace

std::string generate_program(std::mt19937& rng, const GenOptions& opts) { return Gen(rng, opts).program(); }

NaiveResult naive_explore(const Program& program, const VerifierConfig& config) {
  return Naive(program, config).run();
}

std::filesystem::path source_dir() { return MCFL_SOURCE_DIR; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace mcfl::testing
