#include <doctest.h>

#include <random>

#include "filter_checks.hpp"
#include "suitegen/filtering.hpp"
#include "test_support.hpp"

using namespace suitegen;
using namespace suitegen::filtering;
using suitegen::testing::matrix_of;
using Strings = std::vector<std::string>;

namespace {

/// Matrix from column strings ('1' = pass), one row per character.
passmatrix::PassMatrix columns(const Strings& cols) {
  Strings rows(cols.front().size());
  for (const auto& c : cols) {
    for (std::size_t i = 0; i < c.size(); ++i) rows[i] += c[i];
  }
  return matrix_of(rows);
}

std::string passes(std::size_t n, std::size_t k, std::size_t offset = 0) {
  std::string s(n, '0');
  for (std::size_t i = 0; i < k; ++i) s[(i + offset) % n] = '1';
  return s;
}

suite::Problem problem_with(std::size_t n_tests) {
  suite::Problem p;
  p.id = "p";
  p.source = "taco";
  p.question = "Q";
  for (std::size_t i = 0; i < n_tests; ++i) p.append("assert f(" + std::to_string(i) + ")", 0, suite::TestMethod::seed);
  return p;
}

/// The same matrix with columns named after the problem's active tests.
passmatrix::PassMatrix for_problem(const passmatrix::PassMatrix& m, const suite::Problem& p) {
  std::vector<std::string> ids;
  for (const auto* t : p.active()) ids.push_back(t->id);
  std::vector<passmatrix::PassVector> rows;
  for (std::size_t i = 0; i < m.n_solutions(); ++i) rows.push_back(m.row(i));
  return {m.solution_ids(), ids, rows};
}

} // namespace

TEST_CASE("low pass rate is strict") {
  auto m = columns({passes(10, 1), passes(10, 0)});
  auto part = filter_low_pass_rate(m, 0.1);
  CHECK(part.retained == Strings{"t0"});
  CHECK(part.dropped == Strings{"t1"});
  auto m64 = columns({passes(64, 6), passes(64, 7), passes(64, 40)});
  CHECK(filter_low_pass_rate(m64).dropped == Strings{"t0"});
  auto high = columns({passes(8, 4), passes(8, 6), passes(8, 8)});
  CHECK(filter_low_pass_rate(high).dropped.empty());
  // 3/30 is exactly one tenth.
  CHECK(filter_low_pass_rate(columns({passes(30, 3)})).retained == Strings{"t0"});
}

TEST_CASE("class cap keeps the earliest members") {
  Strings nine(9, "1100");
  nine.insert(nine.begin() + 2, "0011");
  auto part = cap_equivalence_classes(columns(nine), 5);
  CHECK(part.retained == Strings{"t0", "t1", "t2", "t3", "t4", "t5"});
  CHECK(part.dropped.size() == 4);
  Strings singles;
  for (std::size_t i = 0; i < 7; ++i) singles.push_back(passes(8, i + 1));
  CHECK(cap_equivalence_classes(columns(singles)).dropped.empty());
  CHECK(cap_equivalence_classes(columns({"10", "10", "10"})).dropped.empty());
  CHECK_THROWS_AS(cap_equivalence_classes(columns({"10"}), 0), InvalidArgument);
}

TEST_CASE("finalize boundaries") {
  auto four = finalize_problem("p", columns({"10", "01", "11", "10"}));
  CHECK(four.reason == FinalizeReason::too_few_tests);
  CHECK_FALSE(four.kept);

  auto rows = [](std::size_t perfect) {
    Strings r(64, "00000");
    for (std::size_t i = 0; i < perfect; ++i) r[i] = "11111";
    return matrix_of(r);
  };
  auto over = finalize_problem("p", rows(61));
  CHECK(over.reason == FinalizeReason::too_many_perfect);
  CHECK(over.n_solutions_perfect == 61);
  auto at = finalize_problem("p", rows(60));
  CHECK(at.kept);
  CHECK(at.reason == FinalizeReason::ok);
  // Too few tests wins over too many perfect.
  CHECK(finalize_problem("p", matrix_of(Strings(64, "1111"))).reason == FinalizeReason::too_few_tests);
}

TEST_CASE("filter pass runs the stages in order") {
  // t0 below lo; t1..t7 identical; t8 distinct. Six survive the cap.
  Strings cols = {passes(20, 1)};
  for (int i = 0; i < 7; ++i) cols.push_back(passes(20, 10));
  cols.push_back(passes(20, 15));
  auto m = columns(cols);
  FilterConfig cfg;
  auto d = filter_pass("p", m, cfg);
  CHECK(d.retained_test_ids == Strings{"t1", "t2", "t3", "t4", "t5", "t8"});
  REQUIRE(d.dropped_tests.size() == 3);
  CHECK(d.dropped_tests[0].id == "t0");
  CHECK(d.dropped_tests[0].reason == suite::TestStatus::pruned_low_pass);
  CHECK(d.dropped_tests[1].reason == suite::TestStatus::pruned_duplicate);
  CHECK(d.kept);
  CHECK(suitegen::testing::filter_violations(m, d, cfg).empty());
}

TEST_CASE("filter invariants hold on random matrices") {
  std::mt19937_64 rng(41);
  FilterConfig cfg;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 10 + rng() % 60;
    const std::size_t t = 1 + rng() % 30;
    // Low density plus duplicated columns exercise every stage.
    auto base = suitegen::testing::random_matrix(rng, n, 1 + t / 3, 0.05 + 0.9 * static_cast<double>(rng() % 100) / 100);
    Strings cols;
    for (std::size_t j = 0; j < t; ++j) cols.push_back(base.column(rng() % base.n_tests()).to_string());
    auto m = columns(cols);
    auto d = filter_pass("p", m, cfg);
    auto v = suitegen::testing::filter_violations(m, d, cfg);
    CAPTURE(trial);
    CHECK(v.empty());
  }
}

TEST_CASE("corpus filtering updates statuses and exports") {
  auto p = problem_with(7);
  auto m = for_problem(
      columns({passes(10, 0), "1100000000", "1100000000", passes(10, 5), passes(10, 6), passes(10, 7), passes(10, 8)}),
      p);
  auto out = filter_corpus({p}, {m}, {});
  const auto& q = out.problems[0];
  CHECK(q.tests[0].status == suite::TestStatus::pruned_low_pass);
  CHECK(q.tests[0].reason == "low_pass_rate");
  CHECK(q.active_count() == 6);
  CHECK(out.decisions[0].kept);

  CHECK_THROWS_AS(filter_corpus({problem_with(3)}, {m}, {}), InvalidArgument);
  CHECK_THROWS_AS(filter_corpus({p}, {}, {}), InvalidArgument);

  auto dir = suitegen::testing::scratch_dir("final");
  Provenance prov{"abc", 7, 3};
  write_final_outputs(dir, out, prov);
  auto data = read_jsonl(dir / "dataset.jsonl");
  REQUIRE(data.size() == 1);
  CHECK(data[0]["tests"].size() == 6);
  CHECK(data[0]["provenance"]["config_hash"] == "abc");
  CHECK(data[0]["tests"][0]["method"] == "seed");
  CHECK(read_jsonl(dir / "archive.jsonl").empty());
  CHECK(read_jsonl(dir / "decisions.jsonl").size() == 1);

  // Filtering the exported state again changes nothing.
  auto again = filter_corpus(out.problems, {m.restrict_tests(out.decisions[0].retained_test_ids)}, {});
  CHECK(again.problems == out.problems);
}

TEST_CASE("dropped problems go to the archive") {
  auto p = problem_with(3);
  auto out = filter_corpus({p}, {for_problem(columns({"10", "01", "11"}), p)}, {});
  auto dir = suitegen::testing::scratch_dir("final_drop");
  write_final_outputs(dir, out, {});
  CHECK(read_jsonl(dir / "dataset.jsonl").empty());
  auto archive = read_jsonl(dir / "archive.jsonl");
  REQUIRE(archive.size() == 1);
  CHECK(archive[0]["decision"]["reason"] == "too_few_tests");
}

TEST_CASE("filter config follows the round config") {
  suite::RoundConfig rc;
  rc.lo_threshold = 0.2;
  rc.class_cap_final = 3;
  auto fc = filter_config(rc);
  CHECK(fc.lo == 0.2);
  CHECK(fc.cap == 3);
  CHECK(fc.min_tests == 5);
  CHECK(fc.max_perfect == 60);
}
