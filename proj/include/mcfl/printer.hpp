// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "mcfl/ast.hpp"

namespace mcfl {

// Canonical text. parse(pretty_print(p)) is structurally equal to p, LineIds
// included, as long as p's LineIds are dense and in source order.
std::string pretty_print(const Program& program);

std::string print_expr(const Expr& e);
std::string print_expr(const ExprPtr& e);

// One statement (and its nested body) at the given indentation depth.
std::string print_stmt(const Stmt& s, int depth = 0);

}  // namespace mcfl
