// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <unordered_map>

#include "mcfl/ast.hpp"
#include "mcfl/linemap.hpp"

namespace mcfl {

// Every `x = f(args);` becomes a block holding one `int p = arg;` per
// parameter, the callee body with its locals renamed apart, and `x = e;` in
// place of the callee's `return e;`. Lines are renumbered densely; the
// optional LineMap records where each output line came from.
Program unwind_calls(const Program& program, LineMap* line_map = nullptr);

namespace detail {

enum class UnwindRole { Plain, CallBlock, ParamDecl, ReturnImage, CalleeBody };

// Unwound program that keeps the original LineIds (copied statements repeat
// the callee's lines). Statement addresses are stable for the object's
// lifetime, so other passes key side tables on them.
struct Unwound {
  Program program;
  std::unordered_map<const Stmt*, UnwindRole> role;  // absent = Plain

  UnwindRole role_of(const Stmt* s) const {
    auto it = role.find(s);
    return it == role.end() ? UnwindRole::Plain : it->second;
  }
};

std::unique_ptr<Unwound> unwind(const Program& program);

}  // namespace detail

}  // namespace mcfl
