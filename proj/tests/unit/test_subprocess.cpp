#include <doctest.h>

#include <chrono>

#include "suitegen/execution.hpp"
#include "test_support.hpp"

using namespace suitegen;
using namespace suitegen::execution;

namespace {

SubprocessExecutor fake_runner(std::chrono::milliseconds overhead = std::chrono::milliseconds(3000)) {
  return SubprocessExecutor({"python3", suitegen::testing::fixture("fake_runner.py").string()}, overhead);
}

std::vector<TestSpec> marked(std::initializer_list<const char*> markers) {
  std::vector<TestSpec> t;
  int i = 0;
  for (const char* m : markers) t.push_back({"t" + std::to_string(i++), std::string("assert ") + m});
  return t;
}

} // namespace

TEST_CASE("missing runner program is unavailable") {
  CHECK_THROWS_AS(SubprocessExecutor({"/nonexistent/runner"}), ExecutorUnavailable);
  CHECK_THROWS_AS(SubprocessExecutor({"no-such-runner-binary-xyz"}), ExecutorUnavailable);
  CHECK_THROWS_AS(SubprocessExecutor(std::vector<std::string>{}), ExecutorUnavailable);
}

TEST_CASE("subprocess runner protocol end to end") {
  auto exec = fake_runner();
  std::vector<SolutionSpec> sols = {{"good", "def f(): pass"}, {"bad", "BROKEN"}};
  auto ts = marked({"PASS", "FAIL", "RAISE"});
  auto table = execute_suite("p", sols, ts, {1000, 64}, exec, {2, nullptr});
  CHECK(table.at(0, 0).status == VerdictStatus::pass);
  CHECK(table.at(0, 1).status == VerdictStatus::fail);
  CHECK(table.at(0, 2).status == VerdictStatus::error);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(table.at(1, t).status == VerdictStatus::error);
    CHECK(table.at(1, t).detail->starts_with("solution load failed"));
  }
  CHECK(exec.invocations() == 2);
  CHECK(exec.identity().find("fake_runner.py") != std::string::npos);
}

TEST_CASE("garbage, skipped, and unexpected lines") {
  auto exec = fake_runner();
  std::vector<SolutionSpec> sols = {{"s", "UNEXPECTED"}};
  auto ts = marked({"GARBAGE", "SKIP", "PASS"});
  auto table = execute_suite("p", sols, ts, {1000, 64}, exec, {1, nullptr});
  CHECK(table.at(0, 0).status == VerdictStatus::crash);
  CHECK(table.at(0, 1).status == VerdictStatus::crash);
  CHECK(table.at(0, 2).status == VerdictStatus::pass);
}

TEST_CASE("nonzero exit keeps earlier verdicts and crashes the rest") {
  auto exec = fake_runner();
  std::vector<SolutionSpec> sols = {{"s", "x"}};
  auto ts = marked({"PASS", "EXIT3", "PASS"});
  auto out = exec.invoke({"x", ts, {1000, 64}});
  CHECK(out.exit_code == 3);
  CHECK(out.stderr_data.find("gave up") != std::string::npos);
  auto table = execute_suite("p", sols, ts, {1000, 64}, exec, {1, nullptr});
  CHECK(table.at(0, 0).status == VerdictStatus::pass);
  CHECK(table.at(0, 1).status == VerdictStatus::crash);
  CHECK(table.at(0, 1).detail->find("code 3") != std::string::npos);
}

TEST_CASE("watchdog bounds a hanging runner") {
  auto exec = fake_runner(std::chrono::milliseconds(700));
  std::vector<SolutionSpec> sols = {{"s", "x"}};
  auto ts = marked({"PASS", "SLEEP"});
  const ExecutionLimits limits{200, 64};
  const auto start = std::chrono::steady_clock::now();
  auto table = execute_suite("p", sols, ts, limits, exec, {1, nullptr});
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed < std::chrono::milliseconds(200 * 2 + 700 + 1500));
  CHECK(table.at(0, 0).status == VerdictStatus::pass);
  CHECK(table.at(0, 1).status == VerdictStatus::timeout);
  CHECK(table.at(0, 1).time_ms >= 200);
}
