// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "mcfl/ast.hpp"

namespace mcfl {

enum class Synthetic { None, Framework, OrderControl, Loopcounter, MutexModel, CondModel, UnwindCopy };

// Where a line of a transformed program came from. `line` is the original
// LineId for kind None (an original statement) and UnwindCopy (a statement
// copied out of a callee); it is unset for the other synthetic kinds, except
// that a pinned nondet input points at the nondet line it pins.
struct LineOrigin {
  Synthetic kind = Synthetic::None;
  LineId line;

  static LineOrigin original(LineId l) { return {Synthetic::None, l}; }
  static LineOrigin unwind_copy(LineId l) { return {Synthetic::UnwindCopy, l}; }
  static LineOrigin synthetic(Synthetic k) { return {k, LineId{}}; }

  bool is_original() const { return kind == Synthetic::None; }
  // Original line this entry reports against, if any.
  LineId source_line() const {
    return kind == Synthetic::None || kind == Synthetic::UnwindCopy ? line : LineId{};
  }
  friend bool operator==(const LineOrigin&, const LineOrigin&) = default;
};

using LineMap = std::map<LineId, LineOrigin>;

std::string synthetic_name(Synthetic k);  // "framework", "unwind-copy", ...
Synthetic synthetic_from_name(const std::string& name);

}  // namespace mcfl
