// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>

#include "mcfl/ast.hpp"
#include "mcfl/linemap.hpp"
#include "mcfl/sequentializer.hpp"

namespace mcfl {

// Diagnosis model of a sequential program. `diag` ranges over 0..diag_max
// where diag_max is the largest LineId of the sequential program; a value L
// replaces the expression at sequential line L by a free choice.
struct InstrumentedProgram {
  Program program;
  std::set<LineId> diag_domain;  // sequential lines that can be substituted
  std::set<Value> blocked;
  Value diag_max = 0;
  std::map<LineId, LineId> site_of;  // sequential line -> instrumented line
};

// Wraps assignments as `x = (diag == L ? nondet() : e);` and if/while
// conditions as `(diag == L ? nondet(0, 1) : c)`, turns asserts into assumes
// and ends main with `assert(0);`. Only lines whose LineMap entry is an
// original statement or a copy from an unwound call are eligible. Throws
// NothingToInstrument if no line is.
InstrumentedProgram instrument(const SequentialProgram& seq);

// For a sequential program without a LineMap: every line is original.
InstrumentedProgram instrument(const Program& program);

// Adds `assume(diag != value);` after the diag draw. Idempotent.
InstrumentedProgram block_diag(const InstrumentedProgram& instr, Value value);

}  // namespace mcfl
