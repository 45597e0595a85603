// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mcfl/cli.hpp"
#include "mcfl/json_io.hpp"
#include "support.hpp"

namespace mcfl {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::source_dir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result mcfl(std::vector<std::string> args) {
  args.insert(args.begin(), "mcfl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string path(const std::string& rel) { return (source_dir() / rel).string(); }

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() / ("mcfl-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n_++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  static inline int n_ = 0;
};

TEST(Cli, ParsesOptions) {
  CliConfig c;
  const char* argv[] = {"mcfl", "localize", "x.mc", "--unwind", "4", "--context-bound", "1", "--nondet", "-2..5",
                        "--deadlock-check", "--json", "--max-states", "99"};
  std::ostringstream out, err;
  EXPECT_FALSE(parse_args(13, argv, c, out, err));
  EXPECT_EQ(c.command, "localize");
  EXPECT_EQ(c.input_path, "x.mc");
  EXPECT_EQ(c.unwind, 4);
  EXPECT_EQ(c.context_bound, 1);
  EXPECT_EQ(c.nondet_lo, -2);
  EXPECT_EQ(c.nondet_hi, 5);
  EXPECT_TRUE(c.deadlock_check);
  EXPECT_TRUE(c.json);
  EXPECT_EQ(c.max_states, 99u);
}

TEST(Cli, StateCapFromEnvironment) {
  ::setenv("MCFL_MAX_STATES", "1234", 1);
  CliConfig c;
  const char* argv[] = {"mcfl", "verify", "x.mc"};
  std::ostringstream out, err;
  EXPECT_FALSE(parse_args(3, argv, c, out, err));
  EXPECT_EQ(c.max_states, 1234u);
  CliConfig d;
  const char* argv2[] = {"mcfl", "verify", "x.mc", "--max-states", "7"};
  EXPECT_FALSE(parse_args(5, argv2, d, out, err));
  EXPECT_EQ(d.max_states, 7u);
  ::unsetenv("MCFL_MAX_STATES");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(mcfl({}).code, kExitUsage);
  EXPECT_EQ(mcfl({"frobnicate", "x.mc"}).code, kExitUsage);
  EXPECT_EQ(mcfl({"verify"}).code, kExitUsage);
  EXPECT_EQ(mcfl({"verify", path("samples/single_fault.mc"), "--nondet", "3"}).code, kExitUsage);
  EXPECT_EQ(mcfl({"verify", path("samples/single_fault.mc"), "--nondet", "3..1"}).code, kExitUsage);
  EXPECT_EQ(mcfl({"verify", path("samples/single_fault.mc"), "--unwind", "0"}).code, kExitUsage);
  EXPECT_EQ(mcfl({"--help"}).code, kExitOk);
}

TEST(Cli, InputErrors) {
  Result missing = mcfl({"verify", "/nonexistent/x.mc"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_FALSE(missing.err.empty());
  TempDir t;
  std::ofstream(t.path() / "bad.mc") << "void main() {\n  x = 1;\n}\n";
  Result bad = mcfl({"verify", (t.path() / "bad.mc").string()});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("bad.mc:2:"), std::string::npos) << bad.err;
}

TEST(Cli, ExitStatuses) {
  TempDir t;
  std::ofstream(t.path() / "safe.mc") << "void main() {\n  int a;\n  a = 1;\n  assert(a == 1);\n}\n";
  EXPECT_EQ(mcfl({"verify", (t.path() / "safe.mc").string()}).code, kExitOk);
  EXPECT_EQ(mcfl({"localize", (t.path() / "safe.mc").string()}).code, kExitOk);
  EXPECT_EQ(mcfl({"verify", path("samples/single_fault.mc")}).code, kExitFaults);
  Result loc = mcfl({"localize", path("samples/single_fault.mc"), "--unwind", "3", "--nondet", "0..8"});
  EXPECT_EQ(loc.code, kExitFaults);
  EXPECT_NE(loc.out.find("faults-found"), std::string::npos);
  EXPECT_EQ(mcfl({"localize", path("samples/abba.mc")}).code, kExitInconclusive);
  EXPECT_EQ(mcfl({"localize", path("benchmarks/queue.mc"), "--max-states", "5"}).code, kExitExhausted);
  EXPECT_EQ(mcfl({"verify", path("benchmarks/queue.mc"), "--max-states", "5"}).code, kExitExhausted);
}

TEST(Cli, JsonReport) {
  Result r = mcfl({"localize", path("samples/single_fault.mc"), "--nondet", "0..8", "--json"});
  ASSERT_EQ(r.code, kExitFaults);
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["status"], "faults-found");
  EXPECT_EQ(dump(j), r.out);
}

TEST(Cli, VerifyOutputFeedsSequentialize) {
  TempDir t;
  Result v = mcfl({"verify", path("benchmarks/account.mc"), "--json"});
  ASSERT_EQ(v.code, kExitFaults);
  std::ofstream(t.path() / "cex.json") << v.out;
  Result direct = mcfl({"sequentialize", path("benchmarks/account.mc")});
  Result from_file =
      mcfl({"sequentialize", path("benchmarks/account.mc"), "--cex", (t.path() / "cex.json").string()});
  EXPECT_EQ(direct.code, kExitFaults);
  EXPECT_EQ(from_file.code, kExitFaults);
  EXPECT_EQ(direct.out, from_file.out);
  EXPECT_NE(direct.out.find("int order[4]"), std::string::npos) << direct.out;

  Result instr = mcfl({"instrument", path("benchmarks/account.mc")});
  EXPECT_EQ(instr.code, kExitFaults);
  EXPECT_NE(instr.out.find("assert(0);"), std::string::npos);
}

TEST(Cli, EmitIntermediates) {
  TempDir t;
  fs::copy_file(source_dir() / "benchmarks/sync02.mc", t.path() / "sync02.mc");
  Result r = mcfl({"localize", (t.path() / "sync02.mc").string(), "--emit-intermediates"});
  EXPECT_EQ(r.code, kExitFaults);
  for (const char* f : {"sync02.cex.json", "sync02.schedule.json", "sync02.seq.mc", "sync02.linemap.json",
                        "sync02.instr.mc", "sync02.instr.json"})
    EXPECT_TRUE(fs::exists(t.path() / f)) << f;
  // The emitted counterexample replays through sequentialize.
  Result s = mcfl({"sequentialize", (t.path() / "sync02.mc").string(), "--deadlock-check", "--cex",
                   (t.path() / "sync02.cex.json").string()});
  EXPECT_EQ(s.code, kExitFaults);
  EXPECT_EQ(s.out, read_text(t.path() / "sync02.seq.mc"));
}

TEST(Cli, SequentializeDeadlockOnly) {
  Result r = mcfl({"sequentialize", path("benchmarks/sync01.mc"), "--deadlock-check"});
  EXPECT_EQ(r.code, kExitFaults) << r.err;
  EXPECT_NE(r.out.find("int order["), std::string::npos) << r.out;
}

TEST(Cli, BenchEmptyDirectory) {
  TempDir t;
  fs::create_directories(t.path() / "empty");
  std::string csv = (t.path() / "out.csv").string();
  Result r = mcfl({"bench", (t.path() / "empty").string(), "--csv", csv});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(read_text(csv), "file,status,D,FE,AE,R,VT_verify,VT_sequentialize,VT_instrument,VT_localize,"
                            "VT_validate,VT_total\n");
}

std::string strip_times(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() >= 6) cells.resize(6);
    for (const auto& c : cells) out += c + ",";
    out += "\n";
  }
  return out;
}

TEST(Cli, BenchIsDeterministic) {
  TempDir t;
  std::string a = (t.path() / "a.csv").string();
  std::string b = (t.path() / "b.csv").string();
  Result r1 = mcfl({"bench", path("benchmarks"), "--csv", a});
  Result r2 = mcfl({"bench", path("benchmarks"), "--csv", b});
  EXPECT_EQ(r1.code, kExitOk);
  EXPECT_EQ(r2.code, kExitOk);
  EXPECT_EQ(strip_times(read_text(a)), strip_times(read_text(b)));
  EXPECT_NE(r1.out.find("FE/AE"), std::string::npos);
}

TEST(Cli, BenchRecordsFailuresAsRows) {
  TempDir t;
  std::ofstream(t.path() / "a_bad.mc") << "void main( {\n";
  fs::copy_file(source_dir() / "benchmarks/account.mc", t.path() / "b_account.mc");
  CliConfig c;
  auto rows = run_bench(t.path(), c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status, "error");
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_EQ(rows[1].status, "faults-found");
  EXPECT_TRUE(rows[1].useful);
}

}  // namespace
}  // namespace mcfl
