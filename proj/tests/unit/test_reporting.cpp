#include <doctest.h>

#include <cmath>

#include "suitegen/reporting.hpp"
#include "synthetic_run.hpp"

using namespace suitegen;
using namespace suitegen::reporting;
using suitegen::testing::matrix_of;
using Strings = std::vector<std::string>;

namespace {

RoundSnapshot snap(int round, std::vector<double> pass, MethodCounts adv = {}, MethodCounts disc = {}) {
  RoundSnapshot s;
  s.round = round;
  s.n_problems = 2;
  s.avg_active_tests = 10.0 + round;
  for (std::size_t i = 0; i < pass.size(); ++i) s.pass_at[kDefaultKs[i]] = pass[i];
  s.per_method = {{"adversarial", adv}, {"discriminative", disc}};
  s.per_source["taco"] = {2, 10.0 + round, s.pass_at};
  return s;
}

/// 1 - C(n-c,k)/C(n,k) by direct product, independent of the library routine.
double estimator(std::size_t n, std::size_t c, std::size_t k) {
  if (n - c < k) return 1.0;
  double ratio = 1.0;
  for (std::size_t i = 0; i < k; ++i) ratio *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  return 1.0 - ratio;
}

suite::SolutionPool pool_of(const std::string& pid, std::size_t models, std::size_t per_model) {
  suite::SolutionPool p;
  p.problem_id = pid;
  for (std::size_t m = 0; m < models; ++m) {
    for (std::size_t k = 0; k < per_model; ++k) {
      p.solutions.push_back({"m" + std::to_string(m) + "#" + std::to_string(k), "m" + std::to_string(m), "x"});
    }
  }
  return p;
}

passmatrix::PassMatrix rows_for(const suite::SolutionPool& pool, const Strings& rows) {
  std::vector<passmatrix::PassVector> data;
  for (const auto& r : rows) data.push_back(passmatrix::PassVector::from_string(r));
  Strings tids;
  for (std::size_t j = 0; j < rows.front().size(); ++j) tids.push_back("t" + std::to_string(j));
  return {pool.ids(), tids, data};
}

} // namespace

TEST_CASE("difficulty series and monotonicity warnings") {
  auto mono = difficulty_report({snap(0, {0.438, 0.7, 0.8}), snap(1, {0.40, 0.6, 0.7}), snap(2, {0.35, 0.5, 0.6}),
                                 snap(3, {0.3122, 0.4, 0.5})});
  CHECK(mono.warnings.empty());
  CHECK(mono.data["monotone"] == true);
  CHECK(mono.table.rows.size() == 4);
  CHECK(mono.table.rows[3][1] == "0.3122");
  CHECK(difficulty_report({snap(0, {0.5, 0.6, 0.7})}).table.rows.size() == 1);
  auto bumpy = difficulty_report({snap(0, {0.5, 0.6, 0.7}), snap(1, {0.55, 0.6, 0.7})});
  REQUIRE(bumpy.warnings.size() == 1);
  CHECK(bumpy.warnings[0].find("pass@1") != std::string::npos);
  CHECK_THROWS_AS(difficulty_report({}), InvalidArgument);
}

TEST_CASE("per-model pass@k") {
  auto pool = pool_of("p", 3, 8);
  Strings rows;
  for (int i = 0; i < 8; ++i) rows.push_back("11");                // m0 always perfect
  for (int i = 0; i < 8; ++i) rows.push_back("10");                // m1 never
  for (int i = 0; i < 8; ++i) rows.push_back(i < 4 ? "11" : "01"); // m2 four of eight
  auto r = per_model_pass_report({pool}, {rows_for(pool, rows)});
  CHECK(r.data["models"]["m0"]["pass_at"]["1"] == doctest::Approx(1.0));
  CHECK(r.data["models"]["m1"]["pass_at"]["8"] == doctest::Approx(0.0));
  CHECK(r.data["models"]["m2"]["pass_at"]["8"] == doctest::Approx(1.0));
  CHECK(r.data["models"]["m2"]["pass_at"]["1"] == doctest::Approx(0.5));
  CHECK(r.data["models"]["m2"]["pass_at"]["4"].get<double>() == doctest::Approx(estimator(8, 4, 4)));
  CHECK_THROWS_AS(per_model_pass_report({pool}, {rows_for(pool, rows)}, {9}), InvalidArgument);
}

TEST_CASE("retention rates and comparison") {
  auto r = retention_report({snap(0, {0, 0, 0}), snap(1, {0, 0, 0}, {100, 30}, {100, 50})});
  auto rows = r.data["rows"];
  CHECK(rows[0]["note"] == "nothing generated");
  CHECK(rows[0]["rate"] == 0.0);
  bool compared = false;
  for (const auto& row : rows) {
    if (row.contains("comparison")) {
      CHECK(row["comparison"] == "discriminative");
      compared = true;
    }
    if (row.value("method", "") == "adversarial" && row["round"] == 1) CHECK(row["rate"] == doctest::Approx(0.3));
  }
  CHECK(compared);
  auto single = retention_report({snap(1, {0, 0, 0}, {100, 40})});
  CHECK(single.data["rows"][0]["rate"] == doctest::Approx(0.4));
}

TEST_CASE("round stats table") {
  auto r = round_stats_report({snap(0, {0.5, 0.6, 0.7}), snap(1, {0.4, 0.5, 0.6})});
  CHECK(r.table.rows.size() == 4);
  CHECK(r.data["rounds"][1]["avg_active_tests"] == 11.0);
  CHECK(r.data["rounds"][0]["per_source"]["taco"]["n_problems"] == 2);
}

TEST_CASE("tables round-trip through text") {
  Table t{"demo", {"a", "longer"}, {{"1", "x"}, {"22222", ""}, {"3", "y z"}}};
  auto text = render_table(t);
  CHECK(text.rfind("# demo\n", 0) == 0);
  CHECK(text.find(" \n") == std::string::npos);
  CHECK(parse_table(text) == t);
  CHECK(parse_table(text + "warning: something\n") == t);
  CHECK(format_real(0.123456) == "0.1235");
}

TEST_CASE("snapshot json round-trip") {
  auto s = snap(2, {0.25, 0.5, 0.75}, {10, 4}, {5, 5});
  CHECK(snapshot_from_json(to_json(s)) == s);
}

TEST_CASE("reliable correctness ignores low-rate columns") {
  // Column 2 is passed by nobody; below lo it cannot veto.
  auto m = matrix_of({"110", "110", "100", "010", "110", "110", "110", "110", "110", "110"});
  CHECK(reliable_correct_count(m, 0.1) == 8);
  CHECK(passmatrix::count_correct(m) == 0);
}

TEST_CASE("reported pass@k matches matrices archived in checkpoints") {
  auto f = suitegen::testing::load_synthetic();
  auto dir = suitegen::testing::scratch_dir("report_ckpt");
  evolution::EvolutionOptions opts;
  opts.checkpoint_dir = dir;
  auto result = suitegen::testing::run_synthetic(f, opts);
  auto diff = difficulty_report(result.snapshots);
  for (int r = 0; r <= 3; ++r) {
    auto cp = evolution::load_checkpoint(dir, r);
    for (std::size_t k : kDefaultKs) {
      double sum = 0.0;
      for (const auto& m : cp.matrices) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < m.n_solutions(); ++i) {
          bool ok = true;
          for (std::size_t j = 0; j < m.n_tests(); ++j) {
            if (10 * m.column_popcount(j) >= m.n_solutions() && !m.at(i, j)) ok = false;
          }
          c += ok;
        }
        sum += estimator(m.n_solutions(), c, k);
      }
      const double reported = diff.data["series"][r]["pass_at"][std::to_string(k)].get<double>();
      CHECK(reported == doctest::Approx(sum / static_cast<double>(cp.matrices.size())).epsilon(1e-12));
    }
  }
  // Regenerating from the checkpoints reproduces the reports byte for byte.
  std::vector<RoundSnapshot> reloaded;
  for (int r = 0; r <= 3; ++r) reloaded.push_back(evolution::load_checkpoint(dir, r).snapshot);
  CHECK(render_table(difficulty_report(reloaded).table) == render_table(diff.table));
  CHECK(retention_report(reloaded).data == retention_report(result.snapshots).data);

  auto out = suitegen::testing::scratch_dir("reports");
  write_reports(out, result.snapshots, result.pools, result.final_matrices);
  for (const char* name : {"difficulty", "per_model", "retention", "round_stats"}) {
    CHECK(std::filesystem::exists(out / (std::string(name) + ".json")));
    CHECK(std::filesystem::exists(out / (std::string(name) + ".txt")));
  }
}
