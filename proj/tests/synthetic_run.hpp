#pragma once

// Loads the synthetic truth-table fixture and runs the refinement loop on it.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "suitegen/corpus.hpp"
#include "suitegen/evolution.hpp"
#include "test_support.hpp"

namespace suitegen::testing {

struct SyntheticFixture {
  std::vector<suite::Problem> problems;
  std::vector<suite::SolutionPool> pools;
  std::unique_ptr<execution::TruthTableExecutor> executor;
  std::unique_ptr<genclient::MockGenerator> generator;
  Json expected;
};

inline SyntheticFixture load_synthetic(std::uint64_t seed = 0) {
  SyntheticFixture f;
  auto corpus = corpus::load_corpus(fixture("synthetic/corpus.jsonl"));
  f.generator = std::make_unique<genclient::MockGenerator>(
      seed, genclient::MockPool::load(fixture("synthetic/mock_pool.json")));
  for (const auto& record : corpus.problems()) {
    f.problems.push_back(evolution::refine_seed_problem(record, *f.generator));
  }
  f.pools = evolution::load_pools(fixture("synthetic/pools.jsonl"));
  f.executor = execution::TruthTableExecutor::load(fixture("synthetic/truth_table.json"));
  f.expected = read_json(fixture("synthetic/expected.json"));
  return f;
}

inline evolution::EvolutionResult run_synthetic(SyntheticFixture& f, const evolution::EvolutionOptions& options = {},
                                                suite::RoundConfig config = {}) {
  return evolution::run_evolution(f.problems, f.pools, config, *f.generator, *f.executor, options);
}

namespace detail {

inline void compare_pass_at(const std::map<std::size_t, double>& got, const Json& want, const std::string& where,
                            std::vector<std::string>& out) {
  for (const auto& [k, v] : want.items()) {
    auto it = got.find(std::stoul(k));
    if (it == got.end() || std::abs(it->second - v.get<double>()) > 1e-12) {
      out.push_back(where + " pass@" + k);
    }
  }
}

} // namespace detail

/// Field-by-field differences from the oracle's snapshots; empty when they agree.
inline std::vector<std::string> snapshot_mismatches(const std::vector<reporting::RoundSnapshot>& got,
                                                    const Json& want) {
  std::vector<std::string> out;
  if (got.size() != want.size()) {
    out.push_back("snapshot count " + std::to_string(got.size()) + " vs " + std::to_string(want.size()));
    return out;
  }
  for (std::size_t r = 0; r < got.size(); ++r) {
    const auto& g = got[r];
    const auto& w = want[r];
    const std::string at = "round " + std::to_string(r);
    if (g.round != w["round"].get<int>()) out.push_back(at + " number");
    if (g.n_problems != w["n_problems"].get<std::size_t>()) out.push_back(at + " n_problems");
    if (std::abs(g.avg_active_tests - w["avg_active_tests"].get<double>()) > 1e-12) out.push_back(at + " avg tests");
    detail::compare_pass_at(g.pass_at, w["pass_at"], at, out);
    for (const auto& [method, counts] : w["per_method"].items()) {
      auto it = g.per_method.find(method);
      if (it == g.per_method.end() || it->second.generated != counts["generated"].get<std::size_t>() ||
          it->second.retained != counts["retained"].get<std::size_t>()) {
        out.push_back(at + " " + method + " counts");
      }
    }
    for (const auto& [source, stats] : w["per_source"].items()) {
      auto it = g.per_source.find(source);
      if (it == g.per_source.end()) {
        out.push_back(at + " missing source " + source);
        continue;
      }
      if (it->second.n_problems != stats["n_problems"].get<std::size_t>() ||
          std::abs(it->second.avg_active_tests - stats["avg_active_tests"].get<double>()) > 1e-12) {
        out.push_back(at + " " + source + " stats");
      }
      detail::compare_pass_at(it->second.pass_at, stats["pass_at"], at + " " + source, out);
    }
  }
  return out;
}

/// Differences between final decisions and the oracle's; empty when they agree.
inline std::vector<std::string> decision_mismatches(const std::vector<filtering::FinalizeDecision>& got,
                                                    const Json& want) {
  std::vector<std::string> out;
  if (got.size() != want.size()) out.push_back("decision count");
  for (const auto& d : got) {
    if (!want.contains(d.problem_id)) {
      out.push_back("unexpected " + d.problem_id);
      continue;
    }
    const auto& w = want[d.problem_id];
    if (d.kept != w["kept"].get<bool>() || filtering::to_string(d.reason) != w["reason"].get<std::string>() ||
        d.retained_test_ids.size() != w["n_retained"].get<std::size_t>() ||
        d.n_solutions_perfect != w["n_solutions_perfect"].get<std::size_t>()) {
      out.push_back(d.problem_id);
    }
  }
  return out;
}

} // namespace suitegen::testing
