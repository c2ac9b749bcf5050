#include <algorithm>
#include <exception>
#include <set>

#include <omp.h>
#include <spdlog/spdlog.h>

#include "suitegen/error.hpp"
#include "suitegen/evolution.hpp"
#include "suitegen/hashing.hpp"

namespace suitegen::evolution {

using genclient::GenerationUnavailable;
using passmatrix::PassMatrix;
using suite::Problem;
using suite::SolutionPool;
using suite::TestMethod;
using suite::TestStatus;

// ---------------------------------------------------------------------------
// Seed refinement

Problem refine_seed_problem(const corpus::ProblemRecord& record, genclient::TestGenerator& generator,
                            std::size_t min_seed_tests, std::vector<genclient::AttemptRecord>* log) {
  genclient::PromptContext ctx;
  ctx.question = record.statement;
  ctx.problem_id = record.id;
  ctx.round = 0;
  if (record.reference_solution && !record.reference_solution->empty()) {
    ctx.kind = genclient::Template::seed_refine;
    ctx.programs = {*record.reference_solution};
  } else {
    ctx.kind = genclient::Template::seed_refine_no_program;
  }
  auto result = generator.produce(ctx, log);

  Problem p;
  p.id = record.id;
  p.source = record.source;
  p.question = result.question.value_or(record.statement);
  p.reference_solution = record.reference_solution;
  std::set<std::string> seen;
  for (auto& t : result.tests) {
    if (seen.insert(genclient::normalize_whitespace(t.code)).second) {
      p.append(std::move(t.code), 0, TestMethod::seed);
    }
  }
  if (p.tests.size() < min_seed_tests) {
    throw GenerationUnavailable("refinement of " + record.id + " produced " + std::to_string(p.tests.size()) +
                                " distinct tests, need " + std::to_string(min_seed_tests));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Sampling

FixtureSampler::FixtureSampler(std::vector<SolutionPool> pools) {
  for (auto& pool : pools) {
    auto& by_tag = programs_[pool.problem_id];
    for (auto& s : pool.solutions) by_tag[s.model_tag].push_back(std::move(s.program));
  }
}

std::vector<std::string> FixtureSampler::sample(const Problem& problem, const std::string& model_tag,
                                                std::size_t count, int attempt) {
  ++calls_;
  if (attempt > 0) return {};
  auto p = programs_.find(problem.id);
  if (p == programs_.end()) return {};
  auto t = p->second.find(model_tag);
  if (t == p->second.end()) return {};
  const auto n = std::min(count, t->second.size());
  return {t->second.begin(), t->second.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<std::string> MockSampler::sample(const Problem& problem, const std::string& model_tag,
                                             std::size_t count, int attempt) {
  ++calls_;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto h = stable_hash64(std::to_string(seed_) + "|" + problem.id + "|" + model_tag + "|" +
                                 std::to_string(attempt) + "|" + std::to_string(k));
    out.push_back("def solve(*args):\n    return " + std::to_string(h % 1000) + "\n");
  }
  return out;
}

ProviderSampler::ProviderSampler(std::map<std::string, std::shared_ptr<genclient::Provider>> providers,
                                 genclient::RetryPolicy policy)
    : providers_(std::move(providers)), policy_(std::move(policy)) {}

std::vector<std::string> ProviderSampler::sample(const Problem& problem, const std::string& model_tag,
                                                 std::size_t count, int /*attempt*/) {
  ++calls_;
  auto it = providers_.find(model_tag);
  if (it == providers_.end()) {
    throw InvalidArgument("no provider configured for model " + model_tag);
  }
  const std::string prompt = "Solve the following programming problem in Python. Reply with the complete "
                             "program in one ```python code block.\n\n" +
                             problem.question;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < count; ++k) {
    try {
      auto program = extract_program(genclient::generate(*it->second, prompt, policy_));
      if (!program.empty()) out.push_back(std::move(program));
    } catch (const GenerationUnavailable& e) {
      spdlog::warn("sampling {} for {}: {}", model_tag, problem.id, e.what());
    }
  }
  return out;
}

std::string extract_program(const std::string& completion) {
  auto open = completion.find("```");
  if (open != std::string::npos) {
    auto body = completion.find('\n', open);
    if (body != std::string::npos) {
      auto close = completion.find("```", body + 1);
      return completion.substr(body + 1, close == std::string::npos ? std::string::npos : close - body - 1);
    }
  }
  auto b = completion.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = completion.find_last_not_of(" \t\r\n");
  return completion.substr(b, e - b + 1);
}

SolutionPool sample_solutions(const Problem& problem, Sampler& sampler, const SamplingConfig& config) {
  SolutionPool pool;
  pool.problem_id = problem.id;
  std::size_t expected = 0;
  for (const auto& tag : config.model_tags) {
    std::vector<std::string> got;
    for (int attempt = 0; attempt <= config.max_resamples && got.size() < config.samples_per_model; ++attempt) {
      for (auto& prog : sampler.sample(problem, tag, config.samples_per_model - got.size(), attempt)) {
        if (got.size() < config.samples_per_model) got.push_back(std::move(prog));
      }
    }
    for (std::size_t k = 0; k < got.size(); ++k) {
      pool.solutions.push_back({tag + "#" + std::to_string(k), tag, std::move(got[k])});
    }
    expected += config.samples_per_model;
  }
  if (pool.solutions.size() < expected) {
    if (pool.solutions.size() < config.min_pool) {
      throw SamplingShortfall("sampling for " + problem.id + " yielded " + std::to_string(pool.solutions.size()) +
                              " solutions, below the floor of " + std::to_string(config.min_pool));
    }
    spdlog::warn("sampling for {} yielded {} of {} solutions", problem.id, pool.solutions.size(), expected);
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Steps

bool executable_somewhere(std::span<const Verdict> column) {
  return std::any_of(column.begin(), column.end(), [](const Verdict& v) {
    return !(v.status == VerdictStatus::error && v.detail && v.detail->rfind("SyntaxError", 0) == 0);
  });
}

namespace {

Json event(const char* kind, const Problem& p, int round, TestMethod method) {
  return {{"event", kind}, {"problem_id", p.id}, {"round", round}, {"method", suite::to_string(method)}};
}

genclient::PromptContext make_context(const Problem& p, const SolutionPool& pool, const PassMatrix& m,
                                      const selection::SelectionResult& sel, genclient::Template kind, int round) {
  genclient::PromptContext ctx;
  ctx.kind = kind;
  ctx.question = p.question;
  ctx.problem_id = p.id;
  ctx.round = round;
  std::map<std::string, const std::string*> code;
  for (const auto& t : p.tests) code[t.id] = &t.code;
  for (const auto& id : m.test_ids()) ctx.tests.push_back(*code.at(id));
  for (auto row : sel.solution_indices) {
    ctx.programs.push_back(pool.solutions.at(row).program);
    std::vector<bool> r(m.n_tests());
    for (std::size_t t = 0; t < m.n_tests(); ++t) r[t] = m.at(row, t);
    ctx.eval.push_back(std::move(r));
  }
  return ctx;
}

using Acceptance = std::function<std::optional<std::string>(std::span<const Verdict>)>; // rejection reason

StepReport run_step(Problem& problem, const SolutionPool& pool, const PassMatrix& round_start, StepContext& sc,
                    TestMethod method, const Acceptance& accept) {
  StepReport rep;
  rep.method = method;
  auto skip = [&](std::string reason) {
    rep.skipped = true;
    rep.skip_reason = reason;
    auto e = event("step_skipped", problem, sc.round, method);
    e["reason"] = std::move(reason);
    rep.events.push_back(std::move(e));
    return rep;
  };
  if (round_start.n_tests() == 0) return skip("empty suite");
  if (round_start.n_solutions() < selection::kSubsetSize) return skip("pool smaller than the selection subset");

  const bool adversarial = method == TestMethod::adversarial;
  const auto retained = adversarial ? selection::prune_near_universal_tests(round_start, sc.config.hi_threshold)
                                    : selection::discriminative_prefilter(round_start, sc.config.lo_threshold);
  const auto m = round_start.restrict_tests(retained);
  auto sel = adversarial ? selection::select_adversarial_solutions(m) : selection::select_discriminative_solutions(m);
  sel.retained_test_ids = retained;
  {
    auto e = event("selection", problem, sc.round, method);
    e["selection"] = selection::to_json(sel);
    rep.events.push_back(std::move(e));
  }
  const auto ctx = make_context(problem, pool, m, sel,
                                adversarial ? genclient::Template::adversarial : genclient::Template::discriminative,
                                sc.round);
  rep.selection = std::move(sel);

  const int calls = adversarial ? sc.config.adversarial_calls : sc.config.discriminative_calls;
  std::vector<genclient::GeneratedTest> candidates;
  for (int call = 0; call < calls; ++call) {
    std::vector<genclient::AttemptRecord> attempts;
    try {
      auto result = sc.generator.produce(ctx, &attempts);
      for (auto& t : result.tests) candidates.push_back(std::move(t));
    } catch (const GenerationUnavailable& e) {
      problem.generation_unavailable = true;
      auto ev = event("generation_failed", problem, sc.round, method);
      ev["detail"] = e.what();
      rep.events.push_back(std::move(ev));
    }
    Json log = Json::array();
    for (const auto& a : attempts) log.push_back({{"attempt", a.attempt}, {"outcome", a.outcome}, {"detail", a.detail}});
    auto ev = event("generation", problem, sc.round, method);
    ev["attempts"] = log;
    rep.events.push_back(std::move(ev));
  }
  if (candidates.empty()) {
    return rep.generated == 0 && problem.generation_unavailable ? skip("generation unavailable") : rep;
  }

  std::set<std::string> existing;
  for (const auto& t : problem.tests) {
    if (t.status != TestStatus::rejected_validation) existing.insert(genclient::normalize_whitespace(t.code));
  }
  std::vector<std::size_t> pending; // indices into problem.tests
  for (auto& c : candidates) {
    auto normalized = genclient::normalize_whitespace(c.code);
    auto& t = problem.append(std::move(c.code), sc.round, method);
    ++rep.generated;
    if (!existing.insert(normalized).second) {
      t.status = TestStatus::rejected_validation;
      t.reason = "duplicate";
    } else {
      pending.push_back(problem.tests.size() - 1);
    }
  }

  if (!pending.empty()) {
    std::vector<execution::TestSpec> specs;
    for (auto i : pending) specs.push_back({problem.tests[i].id, problem.tests[i].code});
    const auto solutions = pool.specs();
    const auto table = execution::execute_suite(problem.id, solutions, specs, sc.limits, sc.executor, sc.exec);
    for (std::size_t j = 0; j < pending.size(); ++j) {
      std::vector<Verdict> column;
      for (std::size_t s = 0; s < table.solution_ids.size(); ++s) column.push_back(table.at(s, j));
      if (auto reason = accept(column)) {
        auto& t = problem.tests[pending[j]];
        t.status = TestStatus::rejected_validation;
        t.reason = *reason;
      }
    }
  }
  for (std::size_t i = problem.tests.size() - rep.generated; i < problem.tests.size(); ++i) {
    const auto& t = problem.tests[i];
    const bool ok = t.status == TestStatus::active;
    rep.retained += ok;
    auto e = event("validation", problem, sc.round, method);
    e["test_id"] = t.id;
    e["accepted"] = ok;
    if (!ok) e["reason"] = t.reason;
    rep.events.push_back(std::move(e));
  }
  return rep;
}

} // namespace

StepReport adversarial_step(Problem& problem, const SolutionPool& pool, const PassMatrix& round_start,
                            StepContext& ctx) {
  return run_step(problem, pool, round_start, ctx, TestMethod::adversarial,
                  [](std::span<const Verdict> col) -> std::optional<std::string> {
                    if (!executable_somewhere(col)) return "syntax_error";
                    return std::nullopt;
                  });
}

StepReport discriminative_step(Problem& problem, const SolutionPool& pool, const PassMatrix& round_start,
                               StepContext& ctx) {
  return run_step(problem, pool, round_start, ctx, TestMethod::discriminative,
                  [](std::span<const Verdict> col) -> std::optional<std::string> {
                    if (!executable_somewhere(col)) return "syntax_error";
                    const auto passes = std::count_if(col.begin(), col.end(),
                                                      [](const Verdict& v) { return v.status == VerdictStatus::pass; });
                    if (passes == 0 || passes == static_cast<std::ptrdiff_t>(col.size())) return "no_split";
                    return std::nullopt;
                  });
}

// ---------------------------------------------------------------------------
// Loop

std::string config_hash(const suite::RoundConfig& config, const execution::ExecutionLimits& limits) {
  Json j = {{"round_config", suite::to_json(config)},
            {"limits", {{"time_limit_ms", limits.time_limit_ms}, {"memory_limit_mb", limits.memory_limit_mb}}}};
  return sha256_hex(j.dump());
}

namespace {

std::vector<std::string> active_ids(const Problem& p) {
  std::vector<std::string> ids;
  for (const auto* t : p.active()) ids.push_back(t->id);
  return ids;
}

// Runs fn(i) for every index in parallel; the first exception by index is rethrown.
template <class Fn>
void parallel_over(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_audit(const std::optional<std::filesystem::path>& dir, int round,
                 const std::vector<std::vector<Json>>& events) {
  if (!dir) return;
  std::vector<Json> rows;
  for (const auto& per_problem : events) rows.insert(rows.end(), per_problem.begin(), per_problem.end());
  std::filesystem::create_directories(*dir);
  char name[32];
  std::snprintf(name, sizeof name, "round_%03d.jsonl", round);
  write_jsonl(*dir / name, rows);
}

} // namespace

EvolutionResult run_evolution(std::vector<Problem> problems, std::vector<SolutionPool> pools,
                              const suite::RoundConfig& config, genclient::TestGenerator& generator,
                              execution::Executor& executor, const EvolutionOptions& options) {
  config.validate();
  options.limits.validate();
  if (problems.size() != pools.size()) {
    throw InvalidArgument("run_evolution: one pool per problem required");
  }
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (problems[i].id != pools[i].problem_id) {
      throw InvalidArgument("run_evolution: pool " + std::to_string(i) + " belongs to " + pools[i].problem_id +
                            ", expected " + problems[i].id);
    }
  }

  execution::VerdictCache local_cache;
  execution::ExecuteOptions exec{options.exec_workers, options.cache ? options.cache : &local_cache};
  const std::string hash = config_hash(config, options.limits);

  EvolutionResult result;
  result.provenance = {hash, config.seed, config.rounds};
  std::vector<PassMatrix> matrices(problems.size());

  auto evaluate = [&](std::size_t i) {
    const auto tests = suite::active_specs(problems[i]);
    const auto solutions = pools[i].specs();
    return execution::execute_suite(problems[i].id, solutions, tests, options.limits, executor, exec).to_matrix();
  };
  auto checkpoint = [&](int round) {
    if (!options.checkpoint_dir) return;
    write_checkpoint(*options.checkpoint_dir,
                     {round, hash, problems, pools, matrices, result.snapshots.back()});
  };

  int start_round = 1;
  std::optional<int> resumable;
  if (options.resume && options.checkpoint_dir) {
    resumable = last_complete_round(*options.checkpoint_dir);
  }
  if (resumable && *resumable <= config.rounds) {
    auto cp = load_checkpoint(*options.checkpoint_dir, *resumable);
    if (cp.config_hash != hash) {
      throw InvalidArgument("checkpoint at round " + std::to_string(*resumable) +
                            " was written with a different configuration");
    }
    for (int r = 0; r < *resumable; ++r) {
      result.snapshots.push_back(load_checkpoint(*options.checkpoint_dir, r).snapshot);
    }
    result.snapshots.push_back(cp.snapshot);
    problems = std::move(cp.problems);
    pools = std::move(cp.pools);
    matrices = std::move(cp.matrices);
    start_round = *resumable + 1;
    result.resumed_from = *resumable;
    spdlog::info("resuming after round {}", *resumable);
  } else {
    parallel_over(problems.size(), options.problem_workers, [&](std::size_t i) { matrices[i] = evaluate(i); });
    result.snapshots.push_back(reporting::compute_snapshot(
        0, problems, matrices, {{"adversarial", {}}, {"discriminative", {}}}, config.lo_threshold));
    checkpoint(0);
  }

  for (int round = start_round; round <= config.rounds; ++round) {
    std::vector<std::vector<Json>> events(problems.size());
    std::vector<StepReport> adv(problems.size()), disc(problems.size());
    parallel_over(problems.size(), options.problem_workers, [&](std::size_t i) {
      StepContext sc{config, generator, executor, options.limits, exec, round};
      const auto start = evaluate(i);
      for (auto* rep : {&adv[i], &disc[i]}) {
        const bool first = rep == &adv[i];
        try {
          *rep = first ? adversarial_step(problems[i], pools[i], start, sc)
                       : discriminative_step(problems[i], pools[i], start, sc);
        } catch (const execution::ExecutorUnavailable&) {
          throw;
        } catch (const Error& e) {
          // A failing problem is skipped for this step; others carry on.
          rep->method = first ? TestMethod::adversarial : TestMethod::discriminative;
          rep->skipped = true;
          rep->skip_reason = e.what();
          rep->events.push_back({{"event", "step_failed"},
                                 {"problem_id", problems[i].id},
                                 {"round", round},
                                 {"method", suite::to_string(rep->method)},
                                 {"detail", e.what()}});
        }
        events[i].insert(events[i].end(), rep->events.begin(), rep->events.end());
      }
      matrices[i] = evaluate(i);
    });

    std::map<std::string, reporting::MethodCounts> counts{{"adversarial", {}}, {"discriminative", {}}};
    for (std::size_t i = 0; i < problems.size(); ++i) {
      counts["adversarial"].generated += adv[i].generated;
      counts["adversarial"].retained += adv[i].retained;
      counts["discriminative"].generated += disc[i].generated;
      counts["discriminative"].retained += disc[i].retained;
    }
    result.snapshots.push_back(
        reporting::compute_snapshot(round, problems, matrices, std::move(counts), config.lo_threshold));
    write_audit(options.audit_dir, round, events);
    checkpoint(round);
    const auto& s = result.snapshots.back();
    spdlog::info("round {}: {} problems, {:.2f} avg tests, pass@1 {:.4f}", round, s.n_problems, s.avg_active_tests,
                 s.pass_at.count(1) ? s.pass_at.at(1) : 0.0);
  }

  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (matrices[i].test_ids() != active_ids(problems[i])) {
      throw Error("internal: matrix out of date for " + problems[i].id);
    }
  }
  result.filtered = filtering::filter_corpus(std::move(problems), matrices, filtering::filter_config(config));
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    result.final_matrices.push_back(matrices[i].restrict_tests(result.filtered.decisions[i].retained_test_ids));
  }
  result.pools = std::move(pools);
  return result;
}

} // namespace suitegen::evolution
