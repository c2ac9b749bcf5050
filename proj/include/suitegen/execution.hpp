#pragma once

// Evaluation of (solution, test) pairs through a runner process, with a
// content-addressed verdict cache and index-ordered assembly.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "suitegen/error.hpp"
#include "suitegen/jsonl.hpp"
#include "suitegen/passmatrix.hpp"
#include "suitegen/verdict.hpp"

namespace suitegen::execution {

struct ExecutionLimits {
  std::int64_t time_limit_ms = 5000;
  std::int64_t memory_limit_mb = 512;
  void validate() const;
  friend bool operator==(const ExecutionLimits&, const ExecutionLimits&) = default;
};

struct TestSpec {
  std::string id;
  std::string code;
};

struct SolutionSpec {
  std::string id;
  std::string program;
};

/// Wire request for one runner invocation: one solution, many tests.
struct RunnerRequest {
  std::string solution;
  std::vector<TestSpec> tests;
  ExecutionLimits limits;
};

Json to_json(const RunnerRequest& r);
RunnerRequest request_from_json(const Json& j);

struct RunnerOutput {
  int exit_code = 0;
  std::string stdout_data;
  std::string stderr_data;
  bool killed_by_watchdog = false;
};

class ExecutorUnavailable : public Error {
public:
  using Error::Error;
};

class Executor {
public:
  virtual ~Executor() = default;
  /// Runs one request to completion. Thread-safe. Throws ExecutorUnavailable
  /// when the runner cannot be started at all.
  virtual RunnerOutput invoke(const RunnerRequest& request) = 0;
  /// Runner identity/version; part of every cache key.
  virtual std::string identity() const = 0;
};

struct ParsedRunnerOutput {
  std::map<std::string, Verdict> verdicts; // exactly the expected ids
  std::vector<std::string> from_runner;     // ids that came from a well-formed line
  bool protocol_failure = false;            // no parsable line at all
  std::vector<std::string> warnings;
};

/// One verdict per expected id. Unknown ids are dropped with a warning;
/// missing ids become crash verdicts (or `missing_status` when given).
ParsedRunnerOutput parse_runner_output(std::string_view bytes,
                                       std::span<const std::string> expected_test_ids,
                                       VerdictStatus missing_status = VerdictStatus::crash,
                                       std::string_view missing_detail = "missing from runner output");

// ---------------------------------------------------------------------------

/// Content-addressed verdict store. Keys hash the solution text, test text,
/// limits, and runner identity, never ids. Optional directory persistence
/// (one JSON file per key). Safe for concurrent use; last write wins.
class VerdictCache {
public:
  VerdictCache() = default;
  explicit VerdictCache(std::filesystem::path directory);

  static std::string make_key(std::string_view solution, std::string_view test,
                              const ExecutionLimits& limits, std::string_view runner);

  std::optional<Verdict> lookup(const std::string& key);
  void store(const std::string& key, const Verdict& verdict);

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t evictions() const { return evictions_.load(); }
  std::size_t size() const;

private:
  std::optional<std::filesystem::path> directory_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Verdict> memory_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> evictions_{0};
};

// ---------------------------------------------------------------------------

struct VerdictTable {
  std::string problem_id;
  std::vector<std::string> solution_ids;
  std::vector<std::string> test_ids;
  std::vector<Verdict> cells; // row-major, solution x test
  ExecutionLimits limits;
  std::string runner;

  const Verdict& at(std::size_t solution, std::size_t test) const {
    return cells.at(solution * test_ids.size() + test);
  }
  passmatrix::VerdictMap to_map() const;
  passmatrix::PassMatrix to_matrix() const;
  /// One line per cell: {"problem_id","solution_id","test_id",status,time_ms[,detail]}.
  std::vector<Json> to_jsonl() const;
  friend bool operator==(const VerdictTable&, const VerdictTable&) = default;
};

struct ExecuteOptions {
  int workers = 0; // 0 = OpenMP default (CPU count)
  VerdictCache* cache = nullptr;
};

struct ExecuteStats {
  std::size_t invocations = 0;
  std::size_t cache_hits = 0;
  std::size_t protocol_failures = 0;
};

/// Evaluates every solution on every test: one runner invocation per solution
/// carrying all uncached tests. Assembly is index-ordered, so the table does
/// not depend on worker count or completion order.
VerdictTable execute_suite(std::string problem_id, std::span<const SolutionSpec> solutions,
                           std::span<const TestSpec> tests, const ExecutionLimits& limits,
                           Executor& executor, const ExecuteOptions& options = {},
                           ExecuteStats* stats = nullptr);

// ---------------------------------------------------------------------------

/// Child-process runner: request JSON on stdin, verdict JSON-lines on stdout.
/// A watchdog kills the process group after time_limit * n_tests + overhead.
class SubprocessExecutor : public Executor {
public:
  /// Throws ExecutorUnavailable if argv[0] is not an executable program.
  explicit SubprocessExecutor(std::vector<std::string> argv,
                              std::chrono::milliseconds overhead = std::chrono::milliseconds(2000),
                              std::string identity = {});

  RunnerOutput invoke(const RunnerRequest& request) override;
  std::string identity() const override { return identity_; }
  std::size_t invocations() const { return invocations_.load(); }

private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds overhead_;
  std::string identity_;
  std::atomic<std::size_t> invocations_{0};
};

/// Outcome-table executor: no code runs. Each problem declares its solution
/// texts and, per test code, one status letter per solution
/// (p=pass f=fail e=error t=timeout c=crash). Unknown test code yields an
/// error verdict with a SyntaxError detail; an unknown solution yields
/// load-failure errors.
class TruthTableExecutor : public Executor {
public:
  TruthTableExecutor() = default;
  static std::unique_ptr<TruthTableExecutor> from_json(const Json& doc);
  static std::unique_ptr<TruthTableExecutor> load(const std::filesystem::path& path);

  void add_problem(const std::string& problem_id, std::vector<std::string> solution_programs);
  /// `outcomes` has one letter per solution of the problem.
  void add_test(const std::string& problem_id, const std::string& code, const std::string& outcomes);

  RunnerOutput invoke(const RunnerRequest& request) override;
  std::string identity() const override { return "truth-table/1"; }
  std::size_t invocations() const { return invocations_.load(); }

private:
  struct Problem {
    std::vector<std::string> programs;
    std::map<std::string, std::string> outcomes; // code -> status letters
  };
  std::map<std::string, Problem> problems_;
  std::map<std::string, std::pair<std::string, std::size_t>> by_program_; // -> (problem, index)
  std::atomic<std::size_t> invocations_{0};
};

} // namespace suitegen::execution
