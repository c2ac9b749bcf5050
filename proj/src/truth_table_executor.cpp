#include "suitegen/execution.hpp"

namespace suitegen::execution {
namespace {

constexpr std::string_view kLetters = "pfetc";

VerdictStatus status_for(char letter) {
  switch (letter) {
  case 'p': return VerdictStatus::pass;
  case 'f': return VerdictStatus::fail;
  case 'e': return VerdictStatus::error;
  case 't': return VerdictStatus::timeout;
  default: return VerdictStatus::crash;
  }
}

} // namespace

std::unique_ptr<TruthTableExecutor> TruthTableExecutor::from_json(const Json& doc) {
  auto exec = std::make_unique<TruthTableExecutor>();
  if (!doc.is_object() || !doc.contains("problems") || !doc["problems"].is_array()) {
    throw FormatError("truth table: expected {\"problems\": [...]}");
  }
  for (const auto& p : doc["problems"]) {
    const auto id = p.at("problem_id").get<std::string>();
    exec->add_problem(id, p.at("solutions").get<std::vector<std::string>>());
    for (const auto& t : p.at("tests")) {
      exec->add_test(id, t.at("code").get<std::string>(), t.at("outcomes").get<std::string>());
    }
  }
  return exec;
}

std::unique_ptr<TruthTableExecutor> TruthTableExecutor::load(const std::filesystem::path& path) {
  return from_json(read_json(path));
}

void TruthTableExecutor::add_problem(const std::string& problem_id,
                                     std::vector<std::string> solution_programs) {
  auto& problem = problems_[problem_id];
  for (std::size_t i = 0; i < solution_programs.size(); ++i) {
    if (!by_program_.emplace(solution_programs[i], std::make_pair(problem_id, i)).second) {
      throw FormatError("truth table: solution text reused in problem " + problem_id);
    }
  }
  problem.programs = std::move(solution_programs);
}

void TruthTableExecutor::add_test(const std::string& problem_id, const std::string& code,
                                  const std::string& outcomes) {
  auto it = problems_.find(problem_id);
  if (it == problems_.end()) {
    throw FormatError("truth table: test for unknown problem " + problem_id);
  }
  if (outcomes.size() != it->second.programs.size() ||
      outcomes.find_first_not_of(kLetters) != std::string::npos) {
    throw FormatError("truth table: outcomes for a test of " + problem_id +
                      " must have one of \"pfetc\" per solution");
  }
  it->second.outcomes.insert_or_assign(code, outcomes);
}

RunnerOutput TruthTableExecutor::invoke(const RunnerRequest& request) {
  ++invocations_;
  RunnerOutput out;
  auto owner = by_program_.find(request.solution);
  for (const auto& test : request.tests) {
    Verdict v{VerdictStatus::pass, 1, std::nullopt};
    if (owner == by_program_.end()) {
      v = {VerdictStatus::error, 0, "solution load failed: unknown solution"};
    } else {
      const auto& problem = problems_.at(owner->second.first);
      auto row = problem.outcomes.find(test.code);
      if (row == problem.outcomes.end()) {
        v = {VerdictStatus::error, 0, "SyntaxError: test not present in truth table"};
      } else {
        v.status = status_for(row->second[owner->second.second]);
        if (v.status == VerdictStatus::timeout) {
          v.time_ms = request.limits.time_limit_ms;
        } else if (v.status == VerdictStatus::fail) {
          v.detail = "AssertionError";
        } else if (v.status == VerdictStatus::error) {
          v.detail = "RuntimeError: planted";
        }
      }
    }
    Json line = to_json(v);
    line["test_id"] = test.id;
    out.stdout_data += line.dump();
    out.stdout_data += '\n';
  }
  return out;
}

} // namespace suitegen::execution
