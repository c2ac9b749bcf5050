#pragma once

// Command surface: configuration loading, flag overrides, and stage wiring.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "suitegen/evolution.hpp"
#include "suitegen/execution.hpp"
#include "suitegen/genclient.hpp"
#include "suitegen/suite.hpp"

namespace suitegen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitUsage = 2;

struct PipelineConfig {
  std::filesystem::path workdir = "work";
  // Optional explicit inputs; stages fall back to files inside the workdir.
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> problems;
  std::optional<std::filesystem::path> pools;
  std::optional<std::filesystem::path> truth_table;
  std::optional<std::filesystem::path> mock_pool;

  suite::RoundConfig round;
  execution::ExecutionLimits limits;
  genclient::ProviderConfig provider;
  std::vector<std::string> runner = {"python3", "-m", "runner_shim"};
  evolution::SamplingConfig sampling;

  double dedup_threshold = 0.9;
  std::size_t knn_k = 10;
  int problem_workers = 0;
  int exec_workers = 1;
  std::uint64_t seed = 0;

  /// Itemized validation errors; empty when valid.
  std::vector<std::string> problems_found() const;
};

/// Unknown keys and any secret-looking key are validation errors.
PipelineConfig config_from_json(const Json& j, std::vector<std::string>& errors);
Json to_json(const PipelineConfig& c);

/// Test seams: injected components replace the ones flags would build.
struct CliEnvironment {
  genclient::TestGenerator* generator = nullptr;
  execution::Executor* executor = nullptr;
  evolution::Sampler* sampler = nullptr;
  std::ostream* out = nullptr; // default std::cout
  std::ostream* err = nullptr; // default std::cerr
};

/// `args` excludes the program name. Returns the process exit status.
int dispatch(const std::vector<std::string>& args, const CliEnvironment& env = {});

} // namespace suitegen::cli
