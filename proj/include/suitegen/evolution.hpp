#pragma once

// The multi-round refinement loop: seed refinement, solution sampling, and
// per-round adversarial and discriminative generation validated by execution.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "suitegen/corpus.hpp"
#include "suitegen/execution.hpp"
#include "suitegen/filtering.hpp"
#include "suitegen/genclient.hpp"
#include "suitegen/reporting.hpp"
#include "suitegen/selection.hpp"
#include "suitegen/suite.hpp"

namespace suitegen::evolution {

// ---------------------------------------------------------------------------
// Seed refinement

/// Generates a refined question and seed tests. Uses the reference-program
/// template when the record has a reference solution. Duplicate seed tests
/// (after whitespace normalization) collapse to the first. Throws
/// GenerationUnavailable when fewer than `min_seed_tests` distinct tests remain.
suite::Problem refine_seed_problem(const corpus::ProblemRecord& record, genclient::TestGenerator& generator,
                                   std::size_t min_seed_tests = 10,
                                   std::vector<genclient::AttemptRecord>* log = nullptr);

// ---------------------------------------------------------------------------
// Solution sampling

class Sampler {
public:
  virtual ~Sampler() = default;
  /// Up to `count` programs from one model; may return fewer.
  virtual std::vector<std::string> sample(const suite::Problem& problem, const std::string& model_tag,
                                          std::size_t count, int attempt) = 0;
  virtual std::string identity() const = 0;
  std::size_t calls() const { return calls_.load(); }

protected:
  std::atomic<std::size_t> calls_{0};
};

/// Replays authored pools; programs are taken in order per model tag and
/// never repeat across attempts.
class FixtureSampler : public Sampler {
public:
  explicit FixtureSampler(std::vector<suite::SolutionPool> pools);
  std::vector<std::string> sample(const suite::Problem& problem, const std::string& model_tag, std::size_t count,
                                  int attempt) override;
  std::string identity() const override { return "fixture"; }

private:
  std::map<std::string, std::map<std::string, std::vector<std::string>>> programs_; // pid -> tag -> programs
};

/// Deterministic placeholder programs keyed by (seed, problem, model, index).
class MockSampler : public Sampler {
public:
  explicit MockSampler(std::uint64_t seed) : seed_(seed) {}
  std::vector<std::string> sample(const suite::Problem& problem, const std::string& model_tag, std::size_t count,
                                  int attempt) override;
  std::string identity() const override { return "mock-sampler/" + std::to_string(seed_); }

private:
  std::uint64_t seed_;
};

/// One provider per model tag; each sample is one completion whose first
/// fenced code block (or whole text) is the program.
class ProviderSampler : public Sampler {
public:
  ProviderSampler(std::map<std::string, std::shared_ptr<genclient::Provider>> providers,
                  genclient::RetryPolicy policy);
  std::vector<std::string> sample(const suite::Problem& problem, const std::string& model_tag, std::size_t count,
                                  int attempt) override;
  std::string identity() const override { return "provider-sampler"; }

private:
  std::map<std::string, std::shared_ptr<genclient::Provider>> providers_;
  genclient::RetryPolicy policy_;
};

/// Text of the first ```-fenced block, or the trimmed text when there is none.
std::string extract_program(const std::string& completion);

struct SamplingConfig {
  std::vector<std::string> model_tags = {"m0", "m1", "m2", "m3", "m4", "m5", "m6", "m7"};
  std::size_t samples_per_model = 8;
  int max_resamples = 3;
  std::size_t min_pool = 2 * selection::kSubsetSize;
};

class SamplingShortfall : public Error {
public:
  using Error::Error;
};

/// Pool of samples_per_model programs per tag, ids "<tag>#<k>". Shortfalls are
/// resampled up to max_resamples times; a smaller pool is accepted when it
/// still holds min_pool programs, otherwise SamplingShortfall is thrown.
suite::SolutionPool sample_solutions(const suite::Problem& problem, Sampler& sampler, const SamplingConfig& config);

// ---------------------------------------------------------------------------
// Generation steps

struct StepContext {
  const suite::RoundConfig& config;
  genclient::TestGenerator& generator;
  execution::Executor& executor;
  execution::ExecutionLimits limits;
  execution::ExecuteOptions exec;
  int round = 1;
};

struct StepReport {
  suite::TestMethod method = suite::TestMethod::adversarial;
  bool skipped = false;
  std::string skip_reason;
  std::size_t generated = 0;
  std::size_t retained = 0;
  std::optional<selection::SelectionResult> selection;
  std::vector<Json> events; // audit records in emission order
};

/// Prunes near-universal tests, selects five solutions, generates, and
/// appends every candidate. Candidates that duplicate an existing test or
/// raise a syntax error for every solution are marked rejected_validation.
StepReport adversarial_step(suite::Problem& problem, const suite::SolutionPool& pool,
                            const passmatrix::PassMatrix& round_start, StepContext& ctx);

/// Like adversarial_step with the discriminative prefilter and selection;
/// candidates must additionally be passed by at least one pool solution and
/// failed by at least one.
StepReport discriminative_step(suite::Problem& problem, const suite::SolutionPool& pool,
                               const passmatrix::PassMatrix& round_start, StepContext& ctx);

/// True when at least one verdict is something other than a SyntaxError.
bool executable_somewhere(std::span<const Verdict> column);

// ---------------------------------------------------------------------------
// Loop

struct EvolutionOptions {
  execution::ExecutionLimits limits;
  int problem_workers = 0; // 0 = OpenMP default
  int exec_workers = 1;    // per problem
  execution::VerdictCache* cache = nullptr;
  std::optional<std::filesystem::path> checkpoint_dir;
  std::optional<std::filesystem::path> audit_dir;
  bool resume = false;
};

struct EvolutionResult {
  std::vector<suite::SolutionPool> pools;
  std::vector<reporting::RoundSnapshot> snapshots; // round 0, then one per round
  filtering::FilterOutputs filtered;               // problems with final statuses + decisions
  std::vector<passmatrix::PassMatrix> final_matrices; // per problem, over retained tests
  filtering::Provenance provenance;
  int resumed_from = -1;
};

std::string config_hash(const suite::RoundConfig& config, const execution::ExecutionLimits& limits);

/// Problems and pools are index-aligned. Problems evolve independently and in
/// parallel; results do not depend on the worker count.
EvolutionResult run_evolution(std::vector<suite::Problem> problems, std::vector<suite::SolutionPool> pools,
                              const suite::RoundConfig& config, genclient::TestGenerator& generator,
                              execution::Executor& executor, const EvolutionOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpoints: <dir>/round_NNN/{meta.json, problems.jsonl, pools.jsonl,
// matrices.jsonl, snapshot.json}. snapshot.json is written last and marks the
// round complete.

struct Checkpoint {
  int round = 0;
  std::string config_hash;
  std::vector<suite::Problem> problems;
  std::vector<suite::SolutionPool> pools;
  std::vector<passmatrix::PassMatrix> matrices;
  reporting::RoundSnapshot snapshot;
};

std::filesystem::path round_directory(const std::filesystem::path& dir, int round);
void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir, int round);
std::optional<int> last_complete_round(const std::filesystem::path& dir);

std::vector<suite::Problem> load_problems(const std::filesystem::path& path);
void save_problems(const std::filesystem::path& path, const std::vector<suite::Problem>& problems);
std::vector<suite::SolutionPool> load_pools(const std::filesystem::path& path);
void save_pools(const std::filesystem::path& path, const std::vector<suite::SolutionPool>& pools);
std::vector<passmatrix::PassMatrix> load_matrices(const std::filesystem::path& path);
void save_matrices(const std::filesystem::path& path, const std::vector<std::string>& problem_ids,
                   const std::vector<passmatrix::PassMatrix>& matrices);

} // namespace suitegen::evolution
