#pragma once

// Final consolidation: drop unreliable and redundant tests, then keep or drop
// each problem. Every threshold is a strict inequality.

#include <filesystem>
#include <string>
#include <vector>

#include "suitegen/passmatrix.hpp"
#include "suitegen/suite.hpp"

namespace suitegen::filtering {

struct Partition {
  std::vector<std::string> retained;
  std::vector<std::string> dropped;
};

/// Tests whose pass rate is below `lo` are dropped; rate == lo stays.
Partition filter_low_pass_rate(const passmatrix::PassMatrix& m, double lo = 0.1);

/// Keeps the first `cap` columns of each pass-vector class, in column order.
Partition cap_equivalence_classes(const passmatrix::PassMatrix& m, std::size_t cap = 5);

enum class FinalizeReason { ok, too_few_tests, too_many_perfect };
std::string_view to_string(FinalizeReason r);

struct DroppedTest {
  std::string id;
  suite::TestStatus reason;
};

struct FinalizeDecision {
  std::string problem_id;
  bool kept = false;
  FinalizeReason reason = FinalizeReason::ok;
  std::vector<std::string> retained_test_ids;
  std::vector<DroppedTest> dropped_tests;
  std::size_t n_solutions_perfect = 0; // over the retained tests
};

Json to_json(const FinalizeDecision& d);

/// Too few tests is checked before too many perfect rows.
FinalizeDecision finalize_problem(const std::string& problem_id, const passmatrix::PassMatrix& m,
                                  std::size_t min_tests = 5, std::size_t max_perfect = 60);

struct FilterConfig {
  double lo = 0.1;
  std::size_t cap = 5;
  std::size_t min_tests = 5;
  std::size_t max_perfect = 60;
};

FilterConfig filter_config(const suite::RoundConfig& c);

/// Low-pass filter, then class cap, then finalize; each stage sees the
/// previous stage's column restriction. The decision lists every column of
/// `m` as retained or dropped.
FinalizeDecision filter_pass(const std::string& problem_id, const passmatrix::PassMatrix& m,
                             const FilterConfig& config);

/// Applies a decision to a problem: dropped tests take their pruned status.
void apply_decision(suite::Problem& problem, const FinalizeDecision& decision);

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  int rounds = 0;
};

/// Export record for a kept problem, carrying only its retained tests.
Json export_record(const suite::Problem& problem, const FinalizeDecision& decision, const Provenance& provenance);

struct FilterOutputs {
  std::vector<suite::Problem> problems; // statuses updated
  std::vector<FinalizeDecision> decisions;
};

/// Runs filter_pass on every problem; `matrices[i]` must cover the active
/// tests of `problems[i]` in order.
FilterOutputs filter_corpus(std::vector<suite::Problem> problems,
                            const std::vector<passmatrix::PassMatrix>& matrices, const FilterConfig& config);

/// final/dataset.jsonl (kept), final/archive.jsonl (dropped problems with
/// their decision), final/decisions.jsonl.
void write_final_outputs(const std::filesystem::path& directory, const FilterOutputs& outputs,
                         const Provenance& provenance);

} // namespace suitegen::filtering
