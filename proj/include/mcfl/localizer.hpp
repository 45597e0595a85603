// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcfl/instrumenter.hpp"
#include "mcfl/schedule.hpp"
#include "mcfl/sequentializer.hpp"
#include "mcfl/verifier.hpp"

namespace mcfl {

struct Diagnosis {
  LineId seq_line;       // the diag value; may lie outside the domain
  LineOrigin original;   // via the sequential LineMap
  Value witness_value = 0;
  int iteration = 0;
  bool oracle_validated = false;
};

enum class ReportStatus { FaultsFound, NoCounterexample, Inconclusive, ResourceExhausted };

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

struct DiagnosisReport {
  ReportStatus status = ReportStatus::NoCounterexample;
  bool deadlock = false;
  std::vector<Diagnosis> diagnoses;
  int found_error_count = 0;
  std::optional<Counterexample> counterexample;
  std::vector<StageTiming> timings;
  std::string reason;  // why an inconclusive run stopped, if not a bad diag

  // Intermediate artifacts, kept for --emit-intermediates and the tests.
  std::optional<Schedule> schedule;
  std::optional<SequentialProgram> sequential;
  std::optional<InstrumentedProgram> instrumented;
  int iterations = 0;
};

DiagnosisReport localize(const Program& program, const VerifierConfig& config);

// The sequential program with line `d`'s expression replaced by `witness`
// verifies safe, no path is cut at the loop bound, and at least one run gets
// all the way through (so a substitution that merely falsifies a pinned input
// does not count). Runs with context bound 0 and deadlock detection off.
bool validate_diag(const SequentialProgram& seq, LineId d, Value witness, const VerifierConfig& config);

// Brute-force localization: eligible lines on the sequential program's
// failing path for which some substitution (domain values for assignments,
// 0/1 for conditions) passes validate_diag.
std::set<LineId> brute_force_fault_lines(const SequentialProgram& seq, const VerifierConfig& config);

std::string status_name(ReportStatus s);

}  // namespace mcfl
