// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mcfl/ast.hpp"

namespace mcfl {

// A maximal run of consecutive steps by one thread.
struct Segment {
  int thread = 0;
  LineId from_line;
  LineId to_line;
  // Iterations started so far of each active while loop of `thread` (keyed
  // by the loop's line), taken before the segment's first step.
  std::map<LineId, int> loop_counters;
  int step_count = 0;
  int tag = 0;  // (thread + 1) * 10 + occurrence of this thread, 1..9
};

struct Schedule {
  std::vector<Segment> segments;
  std::vector<int> order_tags;
  std::map<int, int> per_thread_counts;  // switches away from each thread
  std::vector<std::pair<LineId, Value>> nondet_choices;

  int threads() const {
    int n = 0;
    for (const auto& s : segments) n = std::max(n, s.thread + 1);
    return n;
  }
};

inline int order_tag(int thread, int occurrence) { return (thread + 1) * 10 + occurrence; }

}  // namespace mcfl
