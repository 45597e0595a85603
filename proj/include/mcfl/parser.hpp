// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "mcfl/ast.hpp"
#include "mcfl/error.hpp"

namespace mcfl {

// Parses and checks a `.mc` program. Throws ParseError on syntax errors,
// undeclared or redeclared identifiers, type misuse (e.g. locking an int),
// thread creation of an unknown function, recursion and misplaced returns.
Program parse(std::string_view source);

// Runs the static checks on an already built program (used on the output of
// the transformations). Throws ParseError positioned at the offending LineId.
void check(const Program& program);

Program parse_file(const std::string& path);

}  // namespace mcfl
