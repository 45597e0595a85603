// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcfl/localizer.hpp"
#include "mcfl/verifier.hpp"

namespace mcfl {

enum ExitCode : int { kExitOk = 0, kExitFaults = 1, kExitInconclusive = 2, kExitExhausted = 3, kExitUsage = 4 };

struct CliConfig {
  std::string command;  // verify, sequentialize, instrument, localize, bench
  std::filesystem::path input_path;
  int unwind = 3;
  int context_bound = 3;
  Value nondet_lo = 0;
  Value nondet_hi = 3;
  bool deadlock_check = false;
  bool json = false;
  bool emit_intermediates = false;
  std::size_t max_states = 2'000'000;
  std::optional<std::filesystem::path> cex_path;  // sequentialize: skip verify
  std::optional<std::filesystem::path> csv_path;  // bench

  VerifierConfig verifier() const;
};

// Parses argv into `config`. Returns an exit code if the process should stop
// (help, usage error), having written to `out`/`err`.
std::optional<int> parse_args(int argc, const char* const* argv, CliConfig& config, std::ostream& out,
                              std::ostream& err);

int run(const CliConfig& config, std::ostream& out, std::ostream& err);

struct BenchRow {
  std::string file;
  std::string status;  // a report status, or "error" with `error` set
  bool deadlock = false;
  int fe = 0;
  std::optional<int> ae;  // brute-force oracle; unset without a sequential program
  std::vector<StageTiming> timings;
  bool useful = false;  // R
  std::string error;
  std::optional<DiagnosisReport> report;
};

std::vector<BenchRow> run_bench(const std::filesystem::path& dir, const CliConfig& config);

std::string bench_table(const std::vector<BenchRow>& rows);
std::string bench_csv(const std::vector<BenchRow>& rows);

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcfl
