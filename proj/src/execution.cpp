#include "suitegen/execution.hpp"

#include <exception>
#include <set>

#include <omp.h>
#include <spdlog/spdlog.h>

namespace suitegen::execution {

void ExecutionLimits::validate() const {
  if (time_limit_ms <= 0 || memory_limit_mb <= 0) {
    throw InvalidArgument("execution limits must be strictly positive");
  }
}

Json to_json(const RunnerRequest& r) {
  Json tests = Json::array();
  for (const auto& t : r.tests) {
    tests.push_back({{"id", t.id}, {"code", t.code}});
  }
  return {{"solution", r.solution},
          {"tests", tests},
          {"time_limit_ms", r.limits.time_limit_ms},
          {"memory_limit_mb", r.limits.memory_limit_mb}};
}

RunnerRequest request_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("solution") || !j["solution"].is_string() ||
      !j.contains("tests") || !j["tests"].is_array()) {
    throw FormatError("runner request: expected {\"solution\", \"tests\", ...}");
  }
  RunnerRequest r;
  r.solution = j["solution"].get<std::string>();
  std::set<std::string> seen;
  for (const auto& t : j["tests"]) {
    TestSpec spec{t.at("id").get<std::string>(), t.at("code").get<std::string>()};
    if (!seen.insert(spec.id).second) {
      throw FormatError("runner request: duplicate test id " + spec.id);
    }
    r.tests.push_back(std::move(spec));
  }
  r.limits.time_limit_ms = j.value("time_limit_ms", r.limits.time_limit_ms);
  r.limits.memory_limit_mb = j.value("memory_limit_mb", r.limits.memory_limit_mb);
  r.limits.validate();
  return r;
}

ParsedRunnerOutput parse_runner_output(std::string_view bytes,
                                       std::span<const std::string> expected_test_ids,
                                       VerdictStatus missing_status, std::string_view missing_detail) {
  if (expected_test_ids.empty()) {
    throw InvalidArgument("parse_runner_output: no expected test ids");
  }
  ParsedRunnerOutput out;
  std::set<std::string_view> expected(expected_test_ids.begin(), expected_test_ids.end());
  std::size_t parsed_lines = 0;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) {
      end = bytes.size();
    }
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    std::string id;
    Verdict v;
    try {
      auto j = Json::parse(line);
      if (!j.is_object() || !j.contains("test_id") || !j["test_id"].is_string()) {
        throw FormatError("missing test_id");
      }
      id = j["test_id"].get<std::string>();
      v = verdict_from_json(j);
    } catch (const std::exception& e) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": unparsable verdict (" +
                             e.what() + ")");
      continue;
    }
    ++parsed_lines;
    if (!expected.contains(id)) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": unexpected test id " + id);
      continue;
    }
    if (out.verdicts.contains(id)) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": repeated test id " + id);
      continue;
    }
    out.verdicts.emplace(id, std::move(v));
    out.from_runner.push_back(id);
  }

  out.protocol_failure = parsed_lines == 0;
  for (const auto& id : expected_test_ids) {
    if (!out.verdicts.contains(id)) {
      out.verdicts.emplace(id, Verdict{missing_status, 0, std::string(missing_detail)});
    }
  }
  for (const auto& w : out.warnings) {
    spdlog::warn("runner output: {}", w);
  }
  return out;
}

// ---------------------------------------------------------------------------

passmatrix::VerdictMap VerdictTable::to_map() const {
  passmatrix::VerdictMap m;
  for (std::size_t s = 0; s < solution_ids.size(); ++s) {
    for (std::size_t t = 0; t < test_ids.size(); ++t) {
      m.emplace(passmatrix::CellKey{solution_ids[s], test_ids[t]}, at(s, t));
    }
  }
  return m;
}

passmatrix::PassMatrix VerdictTable::to_matrix() const {
  return passmatrix::build_pass_matrix(to_map(), solution_ids, test_ids);
}

std::vector<Json> VerdictTable::to_jsonl() const {
  std::vector<Json> rows;
  rows.reserve(cells.size());
  for (std::size_t s = 0; s < solution_ids.size(); ++s) {
    for (std::size_t t = 0; t < test_ids.size(); ++t) {
      Json j = to_json(at(s, t));
      j["problem_id"] = problem_id;
      j["solution_id"] = solution_ids[s];
      j["test_id"] = test_ids[t];
      rows.push_back(std::move(j));
    }
  }
  return rows;
}

namespace {

struct RowResult {
  std::vector<Verdict> cells;
  bool invoked = false;
  std::size_t hits = 0;
  bool protocol_failure = false;
};

RowResult evaluate_row(const SolutionSpec& solution, std::span<const TestSpec> tests,
                       const ExecutionLimits& limits, Executor& executor, VerdictCache* cache,
                       const std::string& runner) {
  RowResult row;
  row.cells.resize(tests.size());
  std::vector<std::size_t> pending;
  std::vector<std::string> keys(tests.size());
  for (std::size_t t = 0; t < tests.size(); ++t) {
    if (cache) {
      keys[t] = VerdictCache::make_key(solution.program, tests[t].code, limits, runner);
      if (auto hit = cache->lookup(keys[t])) {
        row.cells[t] = *hit;
        ++row.hits;
        continue;
      }
    }
    pending.push_back(t);
  }
  if (pending.empty()) {
    return row;
  }

  RunnerRequest request;
  request.solution = solution.program;
  request.limits = limits;
  std::vector<std::string> expected;
  for (std::size_t k = 0; k < pending.size(); ++k) {
    request.tests.push_back({tests[pending[k]].id, tests[pending[k]].code});
    expected.push_back(tests[pending[k]].id);
  }
  row.invoked = true;
  RunnerOutput output = executor.invoke(request);

  VerdictStatus fill = VerdictStatus::crash;
  std::string detail = "missing from runner output";
  if (output.killed_by_watchdog) {
    fill = VerdictStatus::timeout;
    detail = "runner killed by watchdog";
  } else if (output.exit_code != 0) {
    detail = "runner exited with code " + std::to_string(output.exit_code);
    if (!output.stderr_data.empty()) {
      detail += ": " + output.stderr_data.substr(0, 200);
    }
  }
  auto parsed = parse_runner_output(output.stdout_data, expected, fill, detail);
  row.protocol_failure = parsed.protocol_failure;
  std::set<std::string> genuine(parsed.from_runner.begin(), parsed.from_runner.end());

  for (std::size_t t : pending) {
    Verdict v = parsed.verdicts.at(tests[t].id);
    if (v.status == VerdictStatus::timeout && v.time_ms < limits.time_limit_ms) {
      v.time_ms = limits.time_limit_ms;
    }
    row.cells[t] = v;
    // Fill-ins describe this invocation, not the (solution, test) content.
    if (cache && genuine.contains(tests[t].id)) {
      cache->store(keys[t], v);
    }
  }
  return row;
}

} // namespace

VerdictTable execute_suite(std::string problem_id, std::span<const SolutionSpec> solutions,
                           std::span<const TestSpec> tests, const ExecutionLimits& limits,
                           Executor& executor, const ExecuteOptions& options, ExecuteStats* stats) {
  limits.validate();
  {
    std::set<std::string_view> ids;
    for (const auto& t : tests) {
      if (!ids.insert(t.id).second) {
        throw InvalidArgument("execute_suite: duplicate test id " + t.id);
      }
    }
  }
  VerdictTable table;
  table.problem_id = std::move(problem_id);
  table.limits = limits;
  table.runner = executor.identity();
  for (const auto& s : solutions) {
    table.solution_ids.push_back(s.id);
  }
  for (const auto& t : tests) {
    table.test_ids.push_back(t.id);
  }
  table.cells.resize(solutions.size() * tests.size());
  if (solutions.empty() || tests.empty()) {
    return table;
  }

  std::vector<RowResult> rows(solutions.size());
  std::vector<std::exception_ptr> errors(solutions.size());
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(solutions.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    try {
      rows[s] = evaluate_row(solutions[s], tests, limits, executor, options.cache, table.runner);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  ExecuteStats local;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    std::copy(rows[s].cells.begin(), rows[s].cells.end(),
              table.cells.begin() + static_cast<std::ptrdiff_t>(s * tests.size()));
    local.invocations += rows[s].invoked ? 1 : 0;
    local.cache_hits += rows[s].hits;
    local.protocol_failures += rows[s].protocol_failure ? 1 : 0;
  }
  if (stats) {
    stats->invocations += local.invocations;
    stats->cache_hits += local.cache_hits;
    stats->protocol_failures += local.protocol_failures;
  }
  return table;
}

} // namespace suitegen::execution
