#include <doctest.h>

#include <functional>

#include "suitegen/evolution.hpp"
#include "synthetic_run.hpp"

using namespace suitegen;
using namespace suitegen::evolution;
using suite::TestMethod;
using suite::TestStatus;
using Strings = std::vector<std::string>;

namespace {

/// Returns fixed candidate lists per template; records every context it sees.
class ScriptedGenerator : public genclient::TestGenerator {
public:
  std::map<genclient::Template, Strings> replies;
  std::optional<std::string> question;
  std::function<void(const genclient::PromptContext&)> hook;
  std::vector<genclient::PromptContext> seen;

  genclient::GenerationResult produce(const genclient::PromptContext& ctx,
                                      std::vector<genclient::AttemptRecord>* log) override {
    ++calls_;
    seen.push_back(ctx);
    if (hook) hook(ctx);
    if (log) log->push_back({1, "ok", {}});
    genclient::GenerationResult r;
    r.question = question;
    const auto& tests = replies[ctx.kind];
    for (std::size_t i = 0; i < tests.size(); ++i) r.tests.push_back({tests[i], i});
    return r;
  }
  std::string identity() const override { return "scripted"; }
};

/// Six solutions and a handful of declared tests.
struct SmallWorld {
  execution::TruthTableExecutor exec;
  suite::SolutionPool pool;
  suite::Problem problem;
  suite::RoundConfig config;

  SmallWorld() {
    Strings programs;
    pool.problem_id = problem.id = "q";
    for (int i = 0; i < 6; ++i) {
      programs.push_back("prog " + std::to_string(i));
      pool.solutions.push_back({"m0#" + std::to_string(i), "m0", programs.back()});
    }
    exec.add_problem("q", programs);
    const std::vector<std::pair<std::string, std::string>> table = {
        {"assert s1", "pppppp"},   {"assert s2", "ppppff"},  {"assert s3", "pfpfpf"},
        {"assert new1", "pppppf"}, {"assert fails", "ffffff"}, {"assert split", "pfffff"},
        {"assert passes", "pppppp"}};
    for (const auto& [code, outcomes] : table) exec.add_test("q", code, outcomes);
    problem.question = "Q";
    for (const char* c : {"assert s1", "assert s2", "assert s3"}) problem.append(c, 0, TestMethod::seed);
  }

  passmatrix::PassMatrix matrix() {
    auto tests = suite::active_specs(problem);
    auto sols = pool.specs();
    return execution::execute_suite("q", sols, tests, {}, exec).to_matrix();
  }
};

std::map<std::string, std::string> statuses(const suite::Problem& p) {
  std::map<std::string, std::string> out;
  for (const auto& t : p.tests) {
    out[t.code] = t.status == TestStatus::active ? "active" : t.reason;
  }
  return out;
}

} // namespace

TEST_CASE("seed refinement picks the template and collapses duplicates") {
  corpus::ProblemRecord with{"a", "taco", "Add numbers.", "print(1)", {}};
  corpus::ProblemRecord without{"b", "apps", "Add numbers.", std::nullopt, {}};
  ScriptedGenerator gen;
  gen.question = "Refined.";
  Strings tests;
  for (int i = 0; i < 10; ++i) tests.push_back("assert add(" + std::to_string(i) + ") == " + std::to_string(i));
  tests.push_back("assert  add(0)  ==  0");
  gen.replies[genclient::Template::seed_refine] = tests;
  gen.replies[genclient::Template::seed_refine_no_program] = tests;

  auto p = refine_seed_problem(with, gen);
  CHECK(gen.seen.back().kind == genclient::Template::seed_refine);
  CHECK(gen.seen.back().programs == Strings{"print(1)"});
  CHECK(p.question == "Refined.");
  CHECK(p.tests.size() == 10);
  CHECK(p.tests.front().id == "t0000");
  CHECK(p.tests.back().id == "t0009");
  CHECK(p.tests.front().method == TestMethod::seed);
  CHECK(p.reference_solution == "print(1)");

  refine_seed_problem(without, gen);
  CHECK(gen.seen.back().kind == genclient::Template::seed_refine_no_program);

  CHECK_THROWS_AS(refine_seed_problem(with, gen, 11), genclient::GenerationUnavailable);
}

TEST_CASE("program extraction") {
  CHECK(extract_program("Here:\n```python\ndef f():\n    return 1\n```\nDone") == "def f():\n    return 1\n");
  CHECK(extract_program("  def g(): pass \n") == "def g(): pass");
  CHECK(extract_program("```\nx = 1") == "x = 1");
}

TEST_CASE("sampling fills the pool and resamples shortfalls") {
  suite::Problem p;
  p.id = "p";
  MockSampler mock(3);
  auto pool = sample_solutions(p, mock, {});
  CHECK(pool.solutions.size() == 64);
  CHECK(pool.solutions[9].id == "m1#1");
  CHECK(pool.solutions[9].model_tag == "m1");
  CHECK(sample_solutions(p, mock, {}) == pool);

  class Stingy : public Sampler {
  public:
    std::size_t per_call;
    explicit Stingy(std::size_t n) : per_call(n) {}
    Strings sample(const suite::Problem&, const std::string& tag, std::size_t count, int attempt) override {
      ++calls_;
      Strings out;
      for (std::size_t k = 0; k < std::min(count, per_call); ++k) out.push_back(tag + "/" + std::to_string(attempt) + "/" + std::to_string(k));
      return out;
    }
    std::string identity() const override { return "stingy"; }
  };
  SamplingConfig cfg;
  cfg.model_tags = {"a", "b"};
  cfg.samples_per_model = 4;
  Stingy two(2);
  auto filled = sample_solutions(p, two, cfg);
  CHECK(filled.solutions.size() == 8);
  CHECK(two.calls() == 4);

  Stingy one(1);
  cfg.max_resamples = 1;
  cfg.min_pool = 4;
  CHECK(sample_solutions(p, one, cfg).solutions.size() == 4);
  cfg.min_pool = 5;
  CHECK_THROWS_AS(sample_solutions(p, one, cfg), SamplingShortfall);
}

TEST_CASE("fixture sampler replays pools without repeats") {
  auto pools = load_pools(suitegen::testing::fixture("synthetic/pools.jsonl"));
  suite::Problem p;
  p.id = pools[3].problem_id;
  FixtureSampler sampler(pools);
  auto pool = sample_solutions(p, sampler, {});
  CHECK(pool == pools[3]);
  CHECK(sampler.sample(p, "m0", 8, 1).empty());
}

TEST_CASE("adversarial step validates candidates") {
  SmallWorld w;
  ScriptedGenerator gen;
  gen.replies[genclient::Template::adversarial] = {"assert new1", "assert   s1", "assert bad(", "assert fails"};
  StepContext sc{w.config, gen, w.exec, {}, {1, nullptr}, 1};
  auto rep = adversarial_step(w.problem, w.pool, w.matrix(), sc);
  CHECK(rep.generated == 4);
  CHECK(rep.retained == 2);
  CHECK_FALSE(rep.skipped);
  auto st = statuses(w.problem);
  CHECK(st["assert new1"] == "active");
  CHECK(st["assert   s1"] == "duplicate");
  CHECK(st["assert bad("] == "syntax_error");
  CHECK(st["assert fails"] == "active");
  CHECK(w.problem.tests.size() == 7);
  CHECK(w.problem.tests[3].round_created == 1);
  CHECK(w.problem.tests[3].method == TestMethod::adversarial);
  // s1 is passed by everyone and therefore withheld from the prompt.
  REQUIRE(rep.selection);
  CHECK(rep.selection->retained_test_ids == Strings{"t0001", "t0002"});
  CHECK(gen.seen.back().tests == Strings{"assert s2", "assert s3"});
  CHECK(gen.seen.back().programs.size() == 5);
}

TEST_CASE("discriminative step requires a split") {
  SmallWorld w;
  ScriptedGenerator gen;
  gen.replies[genclient::Template::discriminative] = {"assert split", "assert fails", "assert passes", "assert split ",
                                                      "assert nope("};
  StepContext sc{w.config, gen, w.exec, {}, {1, nullptr}, 2};
  auto rep = discriminative_step(w.problem, w.pool, w.matrix(), sc);
  CHECK(rep.generated == 5);
  CHECK(rep.retained == 1);
  auto st = statuses(w.problem);
  CHECK(st["assert split"] == "active");
  CHECK(st["assert fails"] == "no_split");
  CHECK(st["assert passes"] == "no_split");
  CHECK(st["assert split "] == "duplicate");
  CHECK(st["assert nope("] == "syntax_error");
  // Rejected candidates never block a later identical one.
  gen.replies[genclient::Template::discriminative] = {"assert fails"};
  auto again = discriminative_step(w.problem, w.pool, w.matrix(), sc);
  CHECK(statuses(w.problem)["assert fails"] == "no_split");
  CHECK(again.generated == 1);
}

TEST_CASE("steps skip when generation is unavailable or the pool is small") {
  SmallWorld w;
  ScriptedGenerator gen;
  gen.hook = [](const genclient::PromptContext&) { throw genclient::GenerationUnavailable("down"); };
  StepContext sc{w.config, gen, w.exec, {}, {1, nullptr}, 1};
  auto rep = adversarial_step(w.problem, w.pool, w.matrix(), sc);
  CHECK(rep.skipped);
  CHECK(w.problem.generation_unavailable);
  CHECK(w.problem.tests.size() == 3);

  w.pool.solutions.resize(4);
  auto small = discriminative_step(w.problem, w.pool, w.matrix(), sc);
  CHECK(small.skipped);
  CHECK(small.skip_reason.find("pool") != std::string::npos);
}

TEST_CASE("syntax error detection looks at every verdict") {
  std::vector<Verdict> col = {{VerdictStatus::error, 0, "SyntaxError: bad"}, {VerdictStatus::error, 0, "SyntaxError: x"}};
  CHECK_FALSE(executable_somewhere(col));
  col.push_back({VerdictStatus::fail, 0, std::nullopt});
  CHECK(executable_somewhere(col));
  std::vector<Verdict> other = {{VerdictStatus::error, 0, "NameError"}};
  CHECK(executable_somewhere(other));
}

TEST_CASE("synthetic evolution matches the independent simulation") {
  auto f = suitegen::testing::load_synthetic();
  auto audit = suitegen::testing::scratch_dir("evo_audit");
  evolution::EvolutionOptions opts;
  opts.audit_dir = audit;
  auto result = suitegen::testing::run_synthetic(f, opts);
  CHECK(suitegen::testing::snapshot_mismatches(result.snapshots, f.expected["snapshots"]).empty());
  CHECK(suitegen::testing::decision_mismatches(result.filtered.decisions, f.expected["final"]).empty());
  CHECK(result.filtered.problems.size() == 20);
  CHECK(result.final_matrices[0].n_tests() == result.filtered.decisions[0].retained_test_ids.size());
  CHECK(std::filesystem::exists(audit / "round_001.jsonl"));
  CHECK(result.filtered.problems[18].generation_unavailable);
}

TEST_CASE("evolution is independent of worker counts") {
  auto f = suitegen::testing::load_synthetic();
  evolution::EvolutionOptions a, b;
  a.problem_workers = 1;
  b.problem_workers = 4;
  b.exec_workers = 3;
  auto ra = suitegen::testing::run_synthetic(f, a);
  auto rb = suitegen::testing::run_synthetic(f, b);
  CHECK(ra.snapshots == rb.snapshots);
  CHECK(ra.filtered.problems == rb.filtered.problems);
  CHECK(ra.final_matrices == rb.final_matrices);
}

TEST_CASE("checkpoints resume to the same result") {
  auto f = suitegen::testing::load_synthetic();
  auto dir = suitegen::testing::scratch_dir("evo_ckpt");
  evolution::EvolutionOptions opts;
  opts.checkpoint_dir = dir;
  auto full = suitegen::testing::run_synthetic(f, opts);
  CHECK(last_complete_round(dir) == 3);
  auto cp = load_checkpoint(dir, 2);
  CHECK(cp.snapshot == full.snapshots[2]);
  CHECK(cp.problems.size() == 20);

  // Lose the last two rounds, one of them half written.
  std::filesystem::remove_all(round_directory(dir, 3));
  std::filesystem::remove(round_directory(dir, 2) / "snapshot.json");
  CHECK(last_complete_round(dir) == 1);
  opts.resume = true;
  auto resumed = suitegen::testing::run_synthetic(f, opts);
  CHECK(resumed.resumed_from == 1);
  CHECK(resumed.snapshots == full.snapshots);
  CHECK(resumed.filtered.problems == full.filtered.problems);

  suite::RoundConfig other;
  other.hi_threshold = 0.8;
  std::filesystem::remove_all(round_directory(dir, 3));
  CHECK_THROWS_AS(suitegen::testing::run_synthetic(f, opts, other), InvalidArgument);
  CHECK(config_hash({}, {}) != config_hash(other, {}));
}

TEST_CASE("a failing problem does not stop the others") {
  auto f = suitegen::testing::load_synthetic();
  class Flaky : public genclient::TestGenerator {
  public:
    explicit Flaky(genclient::TestGenerator& inner) : inner_(inner) {}
    genclient::GenerationResult produce(const genclient::PromptContext& ctx,
                                        std::vector<genclient::AttemptRecord>* log) override {
      if (ctx.problem_id == "p03") throw FormatError("malformed provider state");
      return inner_.produce(ctx, log);
    }
    std::string identity() const override { return "flaky"; }

  private:
    genclient::TestGenerator& inner_;
  } flaky(*f.generator);
  auto result = run_evolution(f.problems, f.pools, {}, flaky, *f.executor);
  const auto& p03 = result.filtered.problems[3];
  for (const auto& t : p03.tests) CHECK(t.round_created == 0);
  CHECK(result.filtered.problems[4].tests.size() > p03.tests.size());
  CHECK(result.snapshots.back().per_method.at("adversarial").generated < 152);
}

TEST_CASE("zero rounds still finalizes") {
  auto f = suitegen::testing::load_synthetic();
  suite::RoundConfig cfg;
  cfg.rounds = 0;
  auto result = suitegen::testing::run_synthetic(f, {}, cfg);
  CHECK(result.snapshots.size() == 1);
  CHECK(result.filtered.decisions.size() == 20);
  CHECK(f.generator->calls() == 20); // seed refinement only
}

TEST_CASE("evolution input validation") {
  auto f = suitegen::testing::load_synthetic();
  auto pools = f.pools;
  std::swap(pools[0], pools[1]);
  CHECK_THROWS_AS(run_evolution(f.problems, pools, {}, *f.generator, *f.executor), InvalidArgument);
  pools.pop_back();
  CHECK_THROWS_AS(run_evolution(f.problems, pools, {}, *f.generator, *f.executor), InvalidArgument);
  suite::RoundConfig bad;
  bad.lo_threshold = 0.95;
  CHECK_THROWS_AS(run_evolution(f.problems, f.pools, bad, *f.generator, *f.executor), InvalidArgument);
}

TEST_CASE("problem, pool, and matrix files round-trip") {
  auto f = suitegen::testing::load_synthetic();
  auto dir = suitegen::testing::scratch_dir("evo_files");
  save_problems(dir / "p.jsonl", f.problems);
  CHECK(load_problems(dir / "p.jsonl") == f.problems);
  save_pools(dir / "s.jsonl", f.pools);
  CHECK(load_pools(dir / "s.jsonl") == f.pools);
  std::vector<passmatrix::PassMatrix> ms = {suitegen::testing::matrix_of({"10", "01"})};
  save_matrices(dir / "m.jsonl", {"x"}, ms);
  CHECK(load_matrices(dir / "m.jsonl") == ms);
}
