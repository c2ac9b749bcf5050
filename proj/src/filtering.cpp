#include <algorithm>
#include <map>
#include <set>

#include "suitegen/error.hpp"
#include "suitegen/filtering.hpp"

namespace suitegen::filtering {

using passmatrix::PassMatrix;

Partition filter_low_pass_rate(const PassMatrix& m, double lo) {
  Partition out;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    (passmatrix::test_pass_rate(m, t) < lo ? out.dropped : out.retained).push_back(m.test_ids()[t]);
  }
  return out;
}

Partition cap_equivalence_classes(const PassMatrix& m, std::size_t cap) {
  if (cap == 0) {
    throw InvalidArgument("class cap must be at least 1");
  }
  std::vector<bool> keep(m.n_tests(), false);
  for (const auto& cls : passmatrix::group_by_pass_vector(m, passmatrix::Axis::tests)) {
    for (std::size_t i = 0; i < cls.members.size() && i < cap; ++i) keep[cls.members[i]] = true;
  }
  Partition out;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    (keep[t] ? out.retained : out.dropped).push_back(m.test_ids()[t]);
  }
  return out;
}

std::string_view to_string(FinalizeReason r) {
  switch (r) {
  case FinalizeReason::ok: return "ok";
  case FinalizeReason::too_few_tests: return "too_few_tests";
  case FinalizeReason::too_many_perfect: return "too_many_perfect";
  }
  return "?";
}

Json to_json(const FinalizeDecision& d) {
  Json dropped = Json::array();
  for (const auto& t : d.dropped_tests) dropped.push_back({{"id", t.id}, {"reason", suite::to_string(t.reason)}});
  return {{"problem_id", d.problem_id},
          {"kept", d.kept},
          {"reason", to_string(d.reason)},
          {"retained_test_ids", d.retained_test_ids},
          {"dropped_tests", dropped},
          {"n_solutions_perfect", d.n_solutions_perfect}};
}

FinalizeDecision finalize_problem(const std::string& problem_id, const PassMatrix& m, std::size_t min_tests,
                                  std::size_t max_perfect) {
  FinalizeDecision d;
  d.problem_id = problem_id;
  d.retained_test_ids = m.test_ids();
  d.n_solutions_perfect = passmatrix::count_correct(m);
  if (m.n_tests() < min_tests) {
    d.reason = FinalizeReason::too_few_tests;
  } else if (d.n_solutions_perfect > max_perfect) {
    d.reason = FinalizeReason::too_many_perfect;
  } else {
    d.kept = true;
  }
  return d;
}

FilterConfig filter_config(const suite::RoundConfig& c) {
  return {c.lo_threshold, c.class_cap_final, c.min_tests, c.max_perfect};
}

FinalizeDecision filter_pass(const std::string& problem_id, const PassMatrix& m, const FilterConfig& config) {
  auto low = filter_low_pass_rate(m, config.lo);
  auto after_low = m.restrict_tests(low.retained);
  auto capped = cap_equivalence_classes(after_low, config.cap);
  auto final_matrix = after_low.restrict_tests(capped.retained);
  auto d = finalize_problem(problem_id, final_matrix, config.min_tests, config.max_perfect);

  std::map<std::string, suite::TestStatus> reason;
  for (const auto& id : low.dropped) reason[id] = suite::TestStatus::pruned_low_pass;
  for (const auto& id : capped.dropped) reason[id] = suite::TestStatus::pruned_duplicate;
  for (const auto& id : m.test_ids()) {
    if (auto it = reason.find(id); it != reason.end()) d.dropped_tests.push_back({id, it->second});
  }
  return d;
}

void apply_decision(suite::Problem& problem, const FinalizeDecision& decision) {
  std::map<std::string, suite::TestStatus> dropped;
  for (const auto& t : decision.dropped_tests) dropped[t.id] = t.reason;
  for (auto& t : problem.tests) {
    if (auto it = dropped.find(t.id); it != dropped.end() && t.status == suite::TestStatus::active) {
      t.status = it->second;
      t.reason = it->second == suite::TestStatus::pruned_low_pass ? "low_pass_rate" : "class_cap";
    }
  }
}

Json export_record(const suite::Problem& problem, const FinalizeDecision& decision, const Provenance& provenance) {
  std::set<std::string> retained(decision.retained_test_ids.begin(), decision.retained_test_ids.end());
  Json tests = Json::array();
  for (const auto& t : problem.tests) {
    if (!retained.count(t.id)) continue;
    tests.push_back({{"id", t.id}, {"code", t.code}, {"round_created", t.round_created},
                     {"method", suite::to_string(t.method)}});
  }
  return {{"id", problem.id},
          {"source", problem.source},
          {"question", problem.question},
          {"tests", tests},
          {"n_solutions_perfect", decision.n_solutions_perfect},
          {"provenance",
           {{"config_hash", provenance.config_hash}, {"seed", provenance.seed}, {"rounds", provenance.rounds}}}};
}

FilterOutputs filter_corpus(std::vector<suite::Problem> problems, const std::vector<PassMatrix>& matrices,
                            const FilterConfig& config) {
  if (problems.size() != matrices.size()) {
    throw InvalidArgument("filter_corpus: one matrix per problem required");
  }
  FilterOutputs out;
  out.decisions.resize(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    std::vector<std::string> active;
    for (const auto* t : problems[i].active()) active.push_back(t->id);
    if (active != matrices[i].test_ids()) {
      throw InvalidArgument("filter_corpus: matrix for " + problems[i].id + " does not match its active tests");
    }
    out.decisions[i] = filter_pass(problems[i].id, matrices[i], config);
    apply_decision(problems[i], out.decisions[i]);
  }
  out.problems = std::move(problems);
  return out;
}

void write_final_outputs(const std::filesystem::path& directory, const FilterOutputs& outputs,
                         const Provenance& provenance) {
  std::vector<Json> dataset, archive, decisions;
  for (std::size_t i = 0; i < outputs.problems.size(); ++i) {
    const auto& d = outputs.decisions[i];
    decisions.push_back(to_json(d));
    if (d.kept) {
      dataset.push_back(export_record(outputs.problems[i], d, provenance));
    } else {
      archive.push_back({{"problem", suite::to_json(outputs.problems[i])}, {"decision", to_json(d)}});
    }
  }
  std::filesystem::create_directories(directory);
  write_jsonl(directory / "dataset.jsonl", dataset);
  write_jsonl(directory / "archive.jsonl", archive);
  write_jsonl(directory / "decisions.jsonl", decisions);
}

} // namespace suitegen::filtering
