// SPDX-License-Identifier: Apache-2.0
//
// Concurrent program + schedule -> one sequential program that replays the
// schedule. Layout:
//
//   <globals>  int order[K] = {tags};  int loopcounter_k = 0; ...
//   int main() {
//     int order_index;
//     for (order_index = 0; order_index < K; order_index = order_index + 1) {
//       switch (order[order_index]) {
//         case 1: { case 11: <main body> } break;
//         case 2: { case 21: <thread 1 body> } break;
//         ...
//         default: break;
//       }
//     }
//     return 1;
//   }
//
// A segment that ends mid-thread is closed by
// `if (order[order_index] == TAG [&& loopcounter_k == N]) { break; }` and the
// thread's next segment resumes at a `case TAG':` label at the same spot.

#pragma once

#include <optional>
#include <vector>

#include "mcfl/ast.hpp"
#include "mcfl/linemap.hpp"
#include "mcfl/schedule.hpp"

namespace mcfl {

struct SequentialProgram {
  Program program;
  LineMap line_map;
};

// The statements `stmt` becomes. Ordinary statement kinds come back
// unchanged; pthread kinds are dropped, or modeled with an int when
// `deadlock` is set. Throws RuleGap for any other kind.
std::vector<Stmt> apply_pthread_rules(const Stmt& stmt, bool deadlock);

// A point in the skeleton: after a statement, or at the start of an
// if/while/block body or of an else branch (a thread block's start is just
// past its entry label).
enum class AnchorKind { After, StartOfBody, StartOfElse };

struct Anchor {
  AnchorKind kind = AnchorKind::After;
  LineId line;
  friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

struct GuardLoop {
  LineId loop;    // while statement in the skeleton
  int count = 0;  // loopcounter value at which the guard fires
};

struct PlanItem {
  Anchor at;
  int time = 0;  // items sharing an anchor are emitted in time order
  bool label = false;
  int tag = 0;
  std::optional<GuardLoop> loop;  // guards only
};

// `x = nondet();` followed by `assume(x == v)`; inside a loop v selects on the
// loop's counter.
struct Pin {
  LineId assign;
  LineId loop;  // unset outside loops
  std::vector<std::pair<int, Value>> values;
};

struct OrderPlan {
  std::vector<PlanItem> items;
  std::vector<Pin> pins;
};

struct Skeleton {
  SequentialProgram seq;
  OrderPlan plan;
};

// The framework with every thread body placed and rewritten but no switch
// control yet, plus the plan that inject_order_control applies.
Skeleton build_skeleton(const Program& program, const Schedule& schedule, bool deadlock);

SequentialProgram inject_order_control(const SequentialProgram& skeleton, const OrderPlan& plan);

SequentialProgram sequentialize(const Program& program, const Schedule& schedule, bool deadlock);

// Reserved by the framework and the instrumenter.
bool is_reserved_name(const std::string& name);

}  // namespace mcfl
