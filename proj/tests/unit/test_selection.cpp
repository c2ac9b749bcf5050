#include <doctest.h>

#include <random>

#include "selection_oracle.hpp"
#include "suitegen/error.hpp"
#include "suitegen/selection.hpp"
#include "test_support.hpp"

using namespace suitegen;
using namespace suitegen::selection;
using suitegen::testing::matrix_of;
namespace oracle = suitegen::testing::oracle;

namespace {

using Ids = std::vector<std::string>;

std::vector<std::size_t> idx(const SelectionResult& r) { return r.solution_indices; }

oracle::Rows rows_of(const passmatrix::PassMatrix& m) {
  oracle::Rows rows;
  for (std::size_t i = 0; i < m.n_solutions(); ++i) rows.push_back(m.row(i).to_string());
  return rows;
}

/// Column-major construction: each string is one test's pass vector.
passmatrix::PassMatrix from_columns(const std::vector<std::string>& cols) {
  oracle::Rows rows(cols.front().size());
  for (const auto& c : cols) {
    for (std::size_t i = 0; i < c.size(); ++i) rows[i] += c[i];
  }
  return matrix_of(rows);
}

std::string col_with(std::size_t n, std::size_t passes) { return std::string(passes, '1') + std::string(n - passes, '0'); }

} // namespace

TEST_CASE("near-universal pruning") {
  CHECK(prune_near_universal_tests(matrix_of({"11", "11"})) == Ids{"t0"});
  // Rates 0.95, 0.5, 0.85 over 20 solutions.
  auto m = from_columns({col_with(20, 19), col_with(20, 10), col_with(20, 17)});
  CHECK(prune_near_universal_tests(m, 0.9) == Ids{"t1", "t2"});
  CHECK(prune_near_universal_tests(matrix_of({"000", "000"})) == Ids{"t0", "t1", "t2"});
  // Exactly at the threshold is pruned.
  CHECK(prune_near_universal_tests(from_columns({col_with(10, 9), col_with(10, 10)}), 0.9) == Ids{"t0"});
  CHECK_THROWS_AS(prune_near_universal_tests(passmatrix::PassMatrix{}), InvalidArgument);
}

TEST_CASE("discriminative prefilter") {
  const auto a = col_with(20, 10);
  auto m = from_columns({col_with(20, 1), a, a, col_with(20, 16)});
  CHECK(discriminative_prefilter(m, 0.1) == Ids{"t1", "t3"});
  CHECK(discriminative_prefilter(from_columns({"1100", "1100", "1100"})) == Ids{"t0"});
  CHECK(discriminative_prefilter(matrix_of({"000", "000"})).size() == 1);
  // Fallback keeps the highest-rate dropped test.
  CHECK(discriminative_prefilter(from_columns({col_with(20, 0), col_with(20, 1)}), 0.1) == Ids{"t1"});
}

TEST_CASE("adversarial selection on the worked 6x3 instance") {
  auto r = select_adversarial_solutions(matrix_of({"111", "110", "000", "101", "011", "111"}));
  REQUIRE(r.solution_ids.size() == 5);
  CHECK(idx(r) == std::vector<std::size_t>{0, 5, 2, 1, 3});
  CHECK(r.rationale[0] == Rationale::top_pass_rate);
  CHECK(r.rationale[1] == Rationale::top_pass_rate);
  CHECK(r.rationale[2] == Rationale::max_disagreement);
  CHECK(r.mode == Mode::adversarial);
  CHECK(r.retained_test_ids == Ids{"t0", "t1", "t2"});
}

TEST_CASE("adversarial selection tie-breaks and minimum size") {
  auto same = select_adversarial_solutions(matrix_of({"10", "10", "10", "10", "10", "10"}));
  CHECK(idx(same) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  auto five = select_adversarial_solutions(matrix_of({"0", "1", "0", "1", "0"}));
  CHECK(idx(five) == std::vector<std::size_t>{1, 3, 0, 2, 4});
  CHECK_THROWS_AS(select_adversarial_solutions(matrix_of({"1", "1", "1", "1"})), InvalidArgument);
}

TEST_CASE("discriminative selection examples") {
  auto r = select_discriminative_solutions(matrix_of({"010", "101", "101", "101", "101", "111"}));
  CHECK(idx(r) == std::vector<std::size_t>{1, 2, 3, 4, 5});
  CHECK(r.rationale[0] == Rationale::overlap_class);
  CHECK(r.rationale[4] == Rationale::overlap_expansion);

  oracle::Rows all(64, "1011");
  auto big = select_discriminative_solutions(matrix_of(all));
  CHECK(idx(big) == std::vector<std::size_t>{0, 1, 2, 3, 4});

  // Distinct rows at pairwise distance >= 2, except rows 7 and 9 coincide.
  oracle::Rows rows = {"000000", "110000", "101000", "100100", "100010", "100001",
                       "011000", "010100", "010010", "010100", "001100"};
  auto m = matrix_of(rows);
  auto d = select_discriminative_solutions(m);
  CHECK(d.solution_indices[0] == 7);
  CHECK(d.solution_indices[1] == 9);
  CHECK(idx(d) == oracle::discriminative(rows));
  CHECK_THROWS_AS(select_discriminative_solutions(matrix_of({"1", "1"})), InvalidArgument);
}

TEST_CASE("selections agree with the reference rules on random matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 20;
    const std::size_t t = 1 + rng() % 12;
    auto m = suitegen::testing::random_matrix(rng, n, t, 0.2 + 0.6 * (trial % 5) / 4.0);
    auto rows = rows_of(m);
    auto adv = select_adversarial_solutions(m);
    auto dis = select_discriminative_solutions(m);
    CHECK(idx(adv) == oracle::adversarial(rows));
    CHECK(idx(dis) == oracle::discriminative(rows));
    CHECK(adv.solution_ids[0] == m.solution_ids()[adv.solution_indices[0]]);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(adv.solution_indices.begin(), adv.solution_indices.end(), i) == adv.solution_indices.end()) {
        CHECK(oracle::ones(rows[i]) <= oracle::ones(rows[adv.solution_indices[1]]));
      }
    }
    auto pruned = prune_near_universal_tests(m);
    auto kept = oracle::prune(rows, 0.9);
    REQUIRE(pruned.size() == kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) CHECK(pruned[k] == m.test_ids()[kept[k]]);
    auto pre = discriminative_prefilter(m);
    auto pre_kept = oracle::prefilter(rows, 0.1);
    REQUIRE(pre.size() == pre_kept.size());
    for (std::size_t k = 0; k < pre_kept.size(); ++k) CHECK(pre[k] == m.test_ids()[pre_kept[k]]);
  }
}

TEST_CASE("selection result serializes") {
  auto r = select_adversarial_solutions(matrix_of({"111", "110", "000", "101", "011", "111"}));
  auto j = to_json(r);
  CHECK(j["mode"] == "adversarial");
  CHECK(j["solution_ids"].size() == 5);
  CHECK(j["rationale"]["s0"] == "top_pass_rate");
  CHECK(j["retained_test_ids"].size() == 3);
}
