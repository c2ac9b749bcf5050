#include <cstdio>

#include "suitegen/error.hpp"
#include "suitegen/suite.hpp"

namespace suitegen::suite {

std::string_view to_string(TestMethod m) {
  switch (m) {
  case TestMethod::seed: return "seed";
  case TestMethod::adversarial: return "adversarial";
  case TestMethod::discriminative: return "discriminative";
  }
  return "?";
}

std::string_view to_string(TestStatus s) {
  switch (s) {
  case TestStatus::active: return "active";
  case TestStatus::pruned_universal: return "pruned_universal";
  case TestStatus::pruned_low_pass: return "pruned_low_pass";
  case TestStatus::pruned_duplicate: return "pruned_duplicate";
  case TestStatus::rejected_validation: return "rejected_validation";
  }
  return "?";
}

TestMethod parse_method(std::string_view s) {
  for (auto m : {TestMethod::seed, TestMethod::adversarial, TestMethod::discriminative}) {
    if (to_string(m) == s) return m;
  }
  throw FormatError("unknown test method: " + std::string(s));
}

TestStatus parse_status(std::string_view s) {
  for (auto st : {TestStatus::active, TestStatus::pruned_universal, TestStatus::pruned_low_pass,
                  TestStatus::pruned_duplicate, TestStatus::rejected_validation}) {
    if (to_string(st) == s) return st;
  }
  throw FormatError("unknown test status: " + std::string(s));
}

Json to_json(const TestCase& t) {
  Json j = {{"id", t.id},
            {"code", t.code},
            {"round_created", t.round_created},
            {"method", to_string(t.method)},
            {"status", to_string(t.status)}};
  if (!t.reason.empty()) j["reason"] = t.reason;
  return j;
}

TestCase test_from_json(const Json& j) {
  try {
    TestCase t;
    t.id = j.at("id").get<std::string>();
    t.code = j.at("code").get<std::string>();
    t.round_created = j.at("round_created").get<int>();
    t.method = parse_method(j.at("method").get<std::string>());
    t.status = parse_status(j.value("status", std::string("active")));
    t.reason = j.value("reason", std::string());
    return t;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("test case: ") + e.what());
  }
}

std::string test_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%04zu", ordinal);
  return buf;
}

std::vector<const TestCase*> Problem::active() const {
  std::vector<const TestCase*> out;
  for (const auto& t : tests) {
    if (t.status == TestStatus::active) out.push_back(&t);
  }
  return out;
}

std::size_t Problem::active_count() const {
  std::size_t n = 0;
  for (const auto& t : tests) n += t.status == TestStatus::active;
  return n;
}

TestCase& Problem::append(std::string code, int round, TestMethod method) {
  TestCase t;
  t.id = test_id(tests.size());
  t.code = std::move(code);
  t.round_created = round;
  t.method = method;
  tests.push_back(std::move(t));
  return tests.back();
}

Json to_json(const Problem& p) {
  Json tests = Json::array();
  for (const auto& t : p.tests) tests.push_back(to_json(t));
  Json j = {{"id", p.id}, {"source", p.source}, {"question", p.question}, {"tests", tests}};
  if (p.reference_solution) j["reference_solution"] = *p.reference_solution;
  if (p.generation_unavailable) j["generation_unavailable"] = true;
  return j;
}

Problem problem_from_json(const Json& j) {
  try {
    Problem p;
    p.id = j.at("id").get<std::string>();
    p.source = j.value("source", std::string());
    p.question = j.at("question").get<std::string>();
    if (j.contains("reference_solution") && j["reference_solution"].is_string()) {
      p.reference_solution = j["reference_solution"].get<std::string>();
    }
    p.generation_unavailable = j.value("generation_unavailable", false);
    for (const auto& t : j.at("tests")) p.tests.push_back(test_from_json(t));
    return p;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("problem: ") + e.what());
  }
}

std::vector<execution::SolutionSpec> SolutionPool::specs() const {
  std::vector<execution::SolutionSpec> out;
  out.reserve(solutions.size());
  for (const auto& s : solutions) out.push_back({s.id, s.program});
  return out;
}

std::vector<std::string> SolutionPool::ids() const {
  std::vector<std::string> out;
  out.reserve(solutions.size());
  for (const auto& s : solutions) out.push_back(s.id);
  return out;
}

Json to_json(const SolutionPool& p) {
  Json sols = Json::array();
  for (const auto& s : p.solutions) {
    sols.push_back({{"id", s.id}, {"model_tag", s.model_tag}, {"program", s.program}});
  }
  return {{"problem_id", p.problem_id}, {"solutions", sols}};
}

SolutionPool pool_from_json(const Json& j) {
  try {
    SolutionPool p;
    p.problem_id = j.at("problem_id").get<std::string>();
    for (const auto& s : j.at("solutions")) {
      Solution sol;
      sol.model_tag = s.at("model_tag").get<std::string>();
      sol.program = s.at("program").get<std::string>();
      sol.id = s.value("id", sol.model_tag + "#" + std::to_string(p.solutions.size()));
      p.solutions.push_back(std::move(sol));
    }
    return p;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("solution pool: ") + e.what());
  }
}

std::vector<execution::TestSpec> active_specs(const Problem& p) {
  std::vector<execution::TestSpec> out;
  for (const auto* t : p.active()) out.push_back({t->id, t->code});
  return out;
}

std::vector<std::string> RoundConfig::problems() const {
  std::vector<std::string> out;
  if (rounds < 0) out.push_back("rounds must be >= 0");
  if (!(lo_threshold > 0.0 && lo_threshold < hi_threshold && hi_threshold <= 1.0)) {
    out.push_back("thresholds must satisfy 0 < lo < hi <= 1");
  }
  if (class_cap_final == 0) out.push_back("class_cap_final must be positive");
  if (min_tests == 0) out.push_back("min_tests must be positive");
  if (max_perfect == 0) out.push_back("max_perfect must be positive");
  if (adversarial_calls < 0 || discriminative_calls < 0) out.push_back("generation call counts must be >= 0");
  return out;
}

void RoundConfig::validate() const {
  auto issues = problems();
  if (issues.empty()) return;
  std::string msg = "invalid round config:";
  for (const auto& i : issues) msg += " " + i + ";";
  throw InvalidArgument(msg);
}

Json to_json(const RoundConfig& c) {
  return {{"rounds", c.rounds},
          {"hi_threshold", c.hi_threshold},
          {"lo_threshold", c.lo_threshold},
          {"class_cap_final", c.class_cap_final},
          {"min_tests", c.min_tests},
          {"max_perfect", c.max_perfect},
          {"min_seed_tests", c.min_seed_tests},
          {"adversarial_calls", c.adversarial_calls},
          {"discriminative_calls", c.discriminative_calls},
          {"seed", c.seed}};
}

RoundConfig round_config_from_json(const Json& j, RoundConfig c) {
  try {
    c.rounds = j.value("rounds", c.rounds);
    c.hi_threshold = j.value("hi_threshold", c.hi_threshold);
    c.lo_threshold = j.value("lo_threshold", c.lo_threshold);
    c.class_cap_final = j.value("class_cap_final", c.class_cap_final);
    c.min_tests = j.value("min_tests", c.min_tests);
    c.max_perfect = j.value("max_perfect", c.max_perfect);
    c.min_seed_tests = j.value("min_seed_tests", c.min_seed_tests);
    c.adversarial_calls = j.value("adversarial_calls", c.adversarial_calls);
    c.discriminative_calls = j.value("discriminative_calls", c.discriminative_calls);
    c.seed = j.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("round config: ") + e.what());
  }
  return c;
}

} // namespace suitegen::suite
