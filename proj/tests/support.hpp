// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit tests and the acceptance runner: a random
// concurrent program generator and a naive interleaving enumerator that walks
// the AST directly (no bytecode, no visited set), used as an oracle for the
// verifier.

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mcfl/ast.hpp"
#include "mcfl/verifier.hpp"

namespace mcfl::testing {

struct GenOptions {
  int max_threads = 3;  // including main
  int max_stmts = 8;    // per thread function, nested statements included
  int shared = 2;
  bool mutex = true;
  bool loops = true;
  bool division = false;
};

std::string generate_program(std::mt19937& rng, const GenOptions& opts);

struct NaiveResult {
  bool violation = false;
  std::size_t paths = 0;
};

// Enumerates every schedule and nondet choice within the context and loop
// bounds. Covers the statement forms generate_program emits.
NaiveResult naive_explore(const Program& program, const VerifierConfig& config);

std::filesystem::path source_dir();  // repository root
std::string read_text(const std::filesystem::path& p);

}  // namespace mcfl::testing
