// SPDX-License-Identifier: Apache-2.0

#include "mcfl/verifier.hpp"

#include <limits>
#include <unordered_map>

#include "mcfl/error.hpp"
#include "mcfl/machine.hpp"

namespace mcfl {

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Safe: return "safe-within-bounds";
    case Outcome::Violation: return "violation";
    case Outcome::ResourceExhausted: return "resource-exhausted";
  }
  return "?";
}

std::string violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::Assertion: return "assertion";
    case ViolationKind::Deadlock: return "deadlock";
    case ViolationKind::DivisionByZero: return "division-by-zero";
  }
  return "?";
}

namespace {

struct Choice {
  Value value, lo, hi;
  LineId line;
};

struct Move {
  int thread = 0;
  std::vector<Choice> choices;
};

// Runs a fixed sequence of moves from the initial state and records the
// trace. The last move is expected to end in the violation (or, for a
// deadlock, to leave every live thread blocked).
Counterexample record(const Machine& m, const std::vector<Move>& moves, int loop_bound, bool div_check) {
  Counterexample cex;
  State s = m.initial();
  std::map<int, int> per_thread;
  for (std::size_t k = 0; k < moves.size(); ++k) {
    const Move& mv = moves[k];
    std::size_t cursor = 0;
    auto choose = [&](const NondetRequest& q) {
      const Choice& c = mv.choices.at(cursor++);
      cex.nondet_choices.emplace_back(q.line, c.value);
      return c.value;
    };
    if (s.last >= 0 && s.last != mv.thread) {
      ContextSwitchRecord sw;
      sw.switch_index = static_cast<int>(cex.switches.size()) + 1;
      sw.from_thread = s.last;
      sw.to_thread = mv.thread;
      sw.at_line = cex.steps.back().line;
      sw.per_thread_index = ++per_thread[s.last];
      cex.switches.push_back(sw);
    }
    LineId line = m.current(s, mv.thread).stmt->line;
    StepResult r = m.step(s, mv.thread, loop_bound, div_check, choose);
    s.last = mv.thread;
    TraceStep st;
    st.step_index = static_cast<int>(k);
    st.thread = mv.thread;
    st.line = line;
    st.valuation = m.valuation(s, mv.thread);
    cex.steps.push_back(std::move(st));
    if (r.outcome == StepOutcome::AssertFail) cex.violation = {ViolationKind::Assertion, line, {}};
    if (r.outcome == StepOutcome::DivByZero) cex.violation = {ViolationKind::DivisionByZero, line, {}};
  }
  if (!moves.empty() && cex.violation.line == LineId{}) {
    cex.violation.kind = ViolationKind::Deadlock;
    cex.violation.blocked_threads = m.blocked_threads(s);
  }
  return cex;
}

class Explorer {
 public:
  Explorer(const Program& p, const VerifierConfig& c) : m_(p), cfg_(c) {}

  VerificationResult run() {
    VerificationResult res;
    struct Frame {
      State state;
      Move move;
      int next_thread = 0;
      bool expanding = false;
      int thread = 0;
      std::vector<Choice> odo;
    };
    std::vector<Frame> stack;
    stack.push_back(Frame{m_.initial(), {}, 0, false, 0, {}});
    visited_[stack.back().state.key()] = 0;
    std::size_t states = 1;

    while (!stack.empty()) {
      Frame& f = stack.back();
      if (!f.expanding) {
        int n = static_cast<int>(f.state.threads.size());
        int t = f.next_thread;
        for (; t < n; ++t) {
          if (!m_.enabled(f.state, t)) continue;
          int cost = (f.state.last >= 0 && f.state.last != t) ? 1 : 0;
          if (f.state.switches + cost <= cfg_.context_bound) break;
        }
        if (t >= n) {
          stack.pop_back();
          continue;
        }
        f.thread = t;
        f.next_thread = t + 1;
        f.expanding = true;
        f.odo.clear();
      } else if (!advance(f.odo)) {
        f.expanding = false;
        continue;
      }

      State next = f.state;
      std::size_t cursor = 0;
      auto choose = [&](const NondetRequest& q) {
        if (cursor < f.odo.size()) return f.odo[cursor++].value;
        Value lo = q.ranged ? q.lo : cfg_.nondet_lo;
        Value hi = q.ranged ? q.hi : cfg_.nondet_hi;
        f.odo.push_back({lo, lo, hi, q.line});
        ++cursor;
        return lo;
      };
      StepResult r = m_.step(next, f.thread, cfg_.loop_bound, cfg_.div_by_zero_check, choose);
      if (f.state.last >= 0 && f.state.last != f.thread) ++next.switches;
      next.last = f.thread;
      Move mv{f.thread, std::vector<Choice>(f.odo.begin(), f.odo.begin() + static_cast<long>(cursor))};

      if (r.outcome == StepOutcome::AssertFail || r.outcome == StepOutcome::DivByZero) {
        return violation(stack, mv, res, states);
      }
      if (r.outcome == StepOutcome::Cut) {
        res.bound_hit |= r.bound_hit;
        continue;
      }
      if (m_.all_done(next)) res.completed = true;
      if (!m_.all_done(next) && !m_.any_enabled(next)) {
        if (cfg_.deadlock_check) return violation(stack, mv, res, states);
        continue;
      }
      auto key = next.key();
      auto it = visited_.find(key);
      if (it != visited_.end() && it->second <= next.switches) continue;
      visited_[key] = next.switches;
      if (++states > cfg_.max_states) {
        res.outcome = Outcome::ResourceExhausted;
        res.states = states;
        return res;
      }
      stack.push_back(Frame{std::move(next), std::move(mv), 0, false, 0, {}});
    }
    res.outcome = Outcome::Safe;
    res.states = states;
    return res;
  }

 private:
  Machine m_;
  VerifierConfig cfg_;
  std::unordered_map<std::string, int> visited_;

  static bool advance(std::vector<Choice>& odo) {
    while (!odo.empty()) {
      if (odo.back().value < odo.back().hi) {
        ++odo.back().value;
        return true;
      }
      odo.pop_back();
    }
    return false;
  }

  template <typename Stack>
  VerificationResult violation(const Stack& stack, const Move& last, VerificationResult& res, std::size_t states) {
    std::vector<Move> moves;
    for (std::size_t i = 1; i < stack.size(); ++i) moves.push_back(stack[i].move);
    moves.push_back(last);
    res.outcome = Outcome::Violation;
    res.counterexample = record(m_, moves, cfg_.loop_bound, cfg_.div_by_zero_check);
    res.states = states;
    return res;
  }
};

}  // namespace

VerificationResult verify(const Program& program, const VerifierConfig& config) {
  if (config.nondet_lo > config.nondet_hi) throw Error("empty nondet domain");
  if (config.loop_bound < 1) throw Error("loop bound must be at least 1");
  return Explorer(program, config).run();
}

VerificationResult replay(const Program& program, const Counterexample& cex) {
  if (cex.steps.empty()) throw TraceMismatch("counterexample has no steps");
  Machine m(program);
  State s = m.initial();
  const int unbounded = std::numeric_limits<int>::max();
  std::size_t next_choice = 0;
  std::vector<Move> moves;
  for (std::size_t k = 0; k < cex.steps.size(); ++k) {
    const TraceStep& st = cex.steps[k];
    if (st.thread < 0 || st.thread >= static_cast<int>(s.threads.size()))
      throw TraceMismatch("step " + std::to_string(k) + " names thread " + std::to_string(st.thread) +
                          ", which does not exist");
    if (!m.live(s, st.thread))
      throw TraceMismatch("step " + std::to_string(k) + " runs finished thread " + std::to_string(st.thread));
    if (!m.enabled(s, st.thread))
      throw TraceMismatch("step " + std::to_string(k) + " runs blocked thread " + std::to_string(st.thread));
    LineId line = m.current(s, st.thread).stmt->line;
    if (line != st.line)
      throw TraceMismatch("step " + std::to_string(k) + " expected line " + std::to_string(st.line.value) +
                          ", program is at line " + std::to_string(line.value));
    Move mv{st.thread, {}};
    auto choose = [&](const NondetRequest& q) {
      if (next_choice >= cex.nondet_choices.size()) throw TraceMismatch("counterexample runs out of nondet choices");
      const auto& [cl, v] = cex.nondet_choices[next_choice++];
      if (cl != q.line) throw TraceMismatch("nondet choice recorded at line " + std::to_string(cl.value) +
                                            " consumed at line " + std::to_string(q.line.value));
      mv.choices.push_back({v, v, v, cl});
      return v;
    };
    StepResult r = m.step(s, st.thread, unbounded, true, choose);
    s.last = st.thread;
    moves.push_back(std::move(mv));
    bool last = k + 1 == cex.steps.size();
    bool violated = r.outcome == StepOutcome::AssertFail || r.outcome == StepOutcome::DivByZero;
    if (r.outcome == StepOutcome::Cut) throw TraceMismatch("path is infeasible at step " + std::to_string(k));
    if (violated && !last) throw TraceMismatch("violation before the end of the trace");
    if (last && !violated && (m.all_done(s) || m.any_enabled(s)))
      throw TraceMismatch("trace ends without a violation");
  }
  if (next_choice != cex.nondet_choices.size()) throw TraceMismatch("unused nondet choices");
  VerificationResult res;
  res.outcome = Outcome::Violation;
  res.counterexample = record(m, moves, unbounded, true);
  return res;
}

Schedule extract_schedule(const Program& program, const Counterexample& cex) {
  Schedule sch;
  sch.nondet_choices = cex.nondet_choices;
  Machine m(program);
  State s = m.initial();
  std::map<int, int> occurrences;
  std::size_t next_choice = 0;
  auto choose = [&](const NondetRequest&) {
    if (next_choice >= cex.nondet_choices.size()) throw TraceMismatch("counterexample runs out of nondet choices");
    return cex.nondet_choices[next_choice++].second;
  };
  for (std::size_t k = 0; k < cex.steps.size(); ++k) {
    const TraceStep& st = cex.steps[k];
    if (st.thread < 0 || st.thread >= static_cast<int>(s.threads.size()) || !m.enabled(s, st.thread))
      throw TraceMismatch("step " + std::to_string(k) + " does not fit the program");
    if (sch.segments.empty() || sch.segments.back().thread != st.thread) {
      if (!sch.segments.empty()) ++sch.per_thread_counts[sch.segments.back().thread];
      Segment seg;
      seg.thread = st.thread;
      seg.from_line = st.line;
      int occ = ++occurrences[st.thread];
      if (occ >= 10)
        throw UnsupportedSchedule("thread " + std::to_string(st.thread) + " runs in ten or more segments");
      seg.tag = order_tag(st.thread, occ);
      const ThreadState& ts = s.threads[st.thread];
      const CompiledFunction& fn = m.functions()[ts.function];
      for (const auto& [loop_stmt, id] : fn.loop_of)
        if (ts.loops[id] > 0) seg.loop_counters[loop_stmt->line] = ts.loops[id];
      sch.segments.push_back(seg);
      sch.order_tags.push_back(seg.tag);
    }
    Segment& seg = sch.segments.back();
    seg.to_line = st.line;
    ++seg.step_count;
    m.step(s, st.thread, std::numeric_limits<int>::max(), false, choose);
    s.last = st.thread;
  }
  for (const auto& seg : sch.segments) sch.per_thread_counts.try_emplace(seg.thread, 0);
  return sch;
}

}  // namespace mcfl
