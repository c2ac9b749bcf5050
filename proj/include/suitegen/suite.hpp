#pragma once

// Problems, their accumulated test suites, and frozen solution pools.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "suitegen/execution.hpp"
#include "suitegen/jsonl.hpp"

namespace suitegen::suite {

enum class TestMethod { seed, adversarial, discriminative };
enum class TestStatus { active, pruned_universal, pruned_low_pass, pruned_duplicate, rejected_validation };

std::string_view to_string(TestMethod m);
std::string_view to_string(TestStatus s);
TestMethod parse_method(std::string_view s);
TestStatus parse_status(std::string_view s);

struct TestCase {
  std::string id; // "t" + zero-padded creation ordinal, so id order is creation order
  std::string code;
  int round_created = 0;
  TestMethod method = TestMethod::seed;
  TestStatus status = TestStatus::active;
  std::string reason; // why a test left the active set; empty while active
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

Json to_json(const TestCase& t);
TestCase test_from_json(const Json& j);

struct Problem {
  std::string id;
  std::string source;
  std::string question;
  std::optional<std::string> reference_solution;
  std::vector<TestCase> tests;
  bool generation_unavailable = false; // set once a generation call exhausted its retries

  std::vector<const TestCase*> active() const;
  std::size_t active_count() const;
  /// Appends a test with the next ordinal id and returns it.
  TestCase& append(std::string code, int round, TestMethod method);
  friend bool operator==(const Problem&, const Problem&) = default;
};

std::string test_id(std::size_t ordinal);
Json to_json(const Problem& p);
Problem problem_from_json(const Json& j);

struct Solution {
  std::string id; // "<model_tag>#<k>"
  std::string model_tag;
  std::string program;
  friend bool operator==(const Solution&, const Solution&) = default;
};

struct SolutionPool {
  std::string problem_id;
  std::vector<Solution> solutions;
  std::vector<execution::SolutionSpec> specs() const;
  std::vector<std::string> ids() const;
  friend bool operator==(const SolutionPool&, const SolutionPool&) = default;
};

Json to_json(const SolutionPool& p);
SolutionPool pool_from_json(const Json& j);

std::vector<execution::TestSpec> active_specs(const Problem& p);

struct RoundConfig {
  int rounds = 3;
  double hi_threshold = 0.9;
  double lo_threshold = 0.1;
  std::size_t class_cap_final = 5;
  std::size_t min_tests = 5;
  std::size_t max_perfect = 60;
  std::size_t min_seed_tests = 10;
  int adversarial_calls = 1;    // generation calls per problem per round
  int discriminative_calls = 1;
  std::uint64_t seed = 0;

  /// Itemized problems; empty when valid.
  std::vector<std::string> problems() const;
  void validate() const; // throws InvalidArgument listing problems()
};

Json to_json(const RoundConfig& c);
RoundConfig round_config_from_json(const Json& j, RoundConfig base = {});

} // namespace suitegen::suite
