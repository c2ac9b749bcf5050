#pragma once

// Generation responses: lenient JSON extraction, schema validation, and
// splitting of multi-assert strings into independent tests.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "suitegen/error.hpp"
#include "suitegen/jsonl.hpp"
#include "suitegen/prompts.hpp"

namespace suitegen::genclient {

struct GeneratedTest {
  std::string code;
  std::size_t origin = 0; // index into the response's "tests" array; siblings share it
  friend bool operator==(const GeneratedTest&, const GeneratedTest&) = default;
};

struct GenerationResult {
  std::optional<std::string> question;
  std::vector<GeneratedTest> tests;
  std::string raw;
  std::string provider;
};

enum class ParseFailure { no_json, wrong_schema, empty_tests, no_valid_tests, too_few_tests };
std::string_view to_string(ParseFailure f);

class GenerationParseError : public Error {
public:
  GenerationParseError(ParseFailure category, const std::string& what)
      : Error(what), category_(category) {}
  ParseFailure category() const { return category_; }

private:
  ParseFailure category_;
};

/// Position and text of the first balanced {...} that parses as JSON.
std::optional<Json> extract_first_json_object(std::string_view text);

/// Splits one response entry into tests, each a block ending in exactly one
/// top-level assert (setup statements attach to the following assert).
/// Splits on newlines and top-level semicolons; brackets, strings, comments,
/// and indented block bodies are respected. Trailing non-assert statements are dropped.
std::vector<std::string> split_asserts(std::string_view entry);

/// True when `code` contains the word "assert" outside string literals and comments.
bool contains_assert(std::string_view code);

/// Trim plus collapse of every whitespace run to one space.
std::string normalize_whitespace(std::string_view code);

/// Throws GenerationParseError. `expects_question` requires a non-empty
/// "question"; otherwise any question field is ignored.
GenerationResult parse_generation(std::string_view raw, bool expects_question);

// ---------------------------------------------------------------------------
// Providers

class TransportError : public Error {
public:
  using Error::Error;
};

class GenerationUnavailable : public Error {
public:
  using Error::Error;
};

class Provider {
public:
  virtual ~Provider() = default;
  /// Text in, text out. Throws TransportError on failure.
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string identity() const = 0;
};

struct ProviderConfig {
  std::string endpoint; // full URL of an OpenAI-compatible chat completions route
  std::string model;
  double temperature = 0.6;
  int max_tokens = 4096;
  std::string auth_env = "SUITEGEN_API_KEY";
  int timeout_s = 300;
};

ProviderConfig provider_config_from_json(const Json& j);
Json to_json(const ProviderConfig& c);

/// POSTs {"model","messages","temperature","max_tokens"} with a bearer token
/// read from the configured environment variable; returns
/// choices[0].message.content.
class HttpProvider : public Provider {
public:
  explicit HttpProvider(ProviderConfig config);
  std::string complete(const std::string& prompt) override;
  std::string identity() const override { return "http:" + config_.model; }

private:
  ProviderConfig config_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
  void pause(int attempt) const; // after failed attempt number `attempt` (1-based)
};

struct AttemptRecord {
  int attempt = 0;
  std::string outcome; // "ok", "transport", or a parse failure category
  std::string detail;
};

/// Provider call with transport-level retries. Throws GenerationUnavailable
/// once attempts are exhausted.
std::string generate(Provider& provider, const std::string& prompt, const RetryPolicy& policy,
                     std::vector<AttemptRecord>* log = nullptr);

// ---------------------------------------------------------------------------
// Context-level generators used by the refinement loop

class TestGenerator {
public:
  virtual ~TestGenerator() = default;
  /// Throws GenerationUnavailable when no acceptable response is obtained.
  virtual GenerationResult produce(const PromptContext& ctx, std::vector<AttemptRecord>* log = nullptr) = 0;
  virtual std::string identity() const = 0;
  std::size_t calls() const { return calls_.load(); }

protected:
  std::atomic<std::size_t> calls_{0};
};

/// Renders, calls the provider, and parses; transport and parse failures both
/// consume attempts. Seed refinement also retries when fewer than
/// `min_seed_tests` tests come back.
class ProviderGenerator : public TestGenerator {
public:
  ProviderGenerator(Provider& provider, RetryPolicy policy, std::size_t min_seed_tests = 10,
                    std::optional<std::filesystem::path> audit_dir = std::nullopt);
  GenerationResult produce(const PromptContext& ctx, std::vector<AttemptRecord>* log = nullptr) override;
  std::string identity() const override { return provider_.identity(); }

private:
  Provider& provider_;
  RetryPolicy policy_;
  std::size_t min_seed_tests_;
  std::optional<std::filesystem::path> audit_dir_;
  std::atomic<std::size_t> audit_seq_{0};
};

/// Authored responses keyed by problem id:
/// {"problems": {pid: {"seed_refine": {"question", "tests"},
///                     "adversarial": [[round-1 tests], [round-2 tests], ...],
///                     "discriminative": [[...], ...],
///                     "unavailable": ["adversarial", ...]}}}
struct MockPool {
  struct Entry {
    std::optional<std::string> question;
    std::vector<std::string> seed_tests;
    std::vector<std::vector<std::string>> adversarial;
    std::vector<std::vector<std::string>> discriminative;
    std::vector<std::string> unavailable;
  };
  std::map<std::string, Entry> problems;

  static MockPool from_json(const Json& j);
  static MockPool load(const std::filesystem::path& path);
};

/// Deterministic offline generation keyed by (seed, problem id, template, round).
/// Authored pool entries are emitted in a seed-dependent order; problems absent
/// from the pool get synthetic asserts drawn from the same key.
GenerationResult mock_generate(std::uint64_t seed, const PromptContext& ctx, const MockPool* pool = nullptr);

class MockGenerator : public TestGenerator {
public:
  explicit MockGenerator(std::uint64_t seed, std::optional<MockPool> pool = std::nullopt)
      : seed_(seed), pool_(std::move(pool)) {}
  GenerationResult produce(const PromptContext& ctx, std::vector<AttemptRecord>* log = nullptr) override;
  std::string identity() const override { return "mock/" + std::to_string(seed_); }

private:
  std::uint64_t seed_;
  std::optional<MockPool> pool_;
};

} // namespace suitegen::genclient
