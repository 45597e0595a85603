// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcfl/ast.hpp"
#include "mcfl/schedule.hpp"

namespace mcfl {

struct VerifierConfig {
  int context_bound = 3;
  int loop_bound = 3;
  Value nondet_lo = 0;
  Value nondet_hi = 3;
  bool deadlock_check = false;
  std::size_t max_states = 2'000'000;
  // With the check off, a division by zero silently cuts the path.
  bool div_by_zero_check = true;
};

struct TraceStep {
  int step_index = 0;
  int thread = 0;
  LineId line;
  std::map<std::string, Value> valuation;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct ContextSwitchRecord {
  int switch_index = 0;
  int from_thread = 0;
  int to_thread = 0;
  LineId at_line;
  int per_thread_index = 0;
  friend bool operator==(const ContextSwitchRecord&, const ContextSwitchRecord&) = default;
};

enum class ViolationKind { Assertion, Deadlock, DivisionByZero };

struct Violation {
  ViolationKind kind = ViolationKind::Assertion;
  LineId line;                      // assertion / division
  std::vector<int> blocked_threads;  // deadlock
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct Counterexample {
  std::vector<TraceStep> steps;
  std::vector<ContextSwitchRecord> switches;
  Violation violation;
  std::vector<std::pair<LineId, Value>> nondet_choices;

  bool is_deadlock() const { return violation.kind == ViolationKind::Deadlock; }
  const std::map<std::string, Value>& final_valuation() const { return steps.back().valuation; }
  friend bool operator==(const Counterexample&, const Counterexample&) = default;
};

enum class Outcome { Safe, Violation, ResourceExhausted };

struct VerificationResult {
  Outcome outcome = Outcome::Safe;
  std::optional<Counterexample> counterexample;
  bool bound_hit = false;  // some path was cut by the loop bound
  bool completed = false;  // some path ran every thread to its end
  std::size_t states = 0;
};

VerificationResult verify(const Program& program, const VerifierConfig& config);

// Re-executes the counterexample's schedule and nondet choices. Throws
// TraceMismatch if it does not fit the program.
VerificationResult replay(const Program& program, const Counterexample& cex);

// Throws UnsupportedSchedule if a thread runs in ten or more segments.
Schedule extract_schedule(const Program& program, const Counterexample& cex);

std::string outcome_name(Outcome o);
std::string violation_name(ViolationKind k);

}  // namespace mcfl
