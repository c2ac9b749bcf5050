#include <doctest.h>

#include <random>

#include "suitegen/error.hpp"
#include "suitegen/passmatrix.hpp"
#include "test_support.hpp"

using namespace suitegen;
using namespace suitegen::passmatrix;
using suitegen::testing::matrix_of;

namespace {

VerdictMap grid(const std::vector<std::vector<VerdictStatus>>& cells) {
  VerdictMap m;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      m[{"s" + std::to_string(i), "t" + std::to_string(j)}] = {cells[i][j], 1, std::nullopt};
    }
  }
  return m;
}

constexpr auto P = VerdictStatus::pass;
constexpr auto F = VerdictStatus::fail;
constexpr auto T = VerdictStatus::timeout;

} // namespace

TEST_CASE("build_pass_matrix maps pass to 1 and everything else to 0") {
  auto all = build_pass_matrix(grid({{P, P}, {P, P}}), {"s0", "s1"}, {"t0", "t1"});
  CHECK(all.popcount() == 4);
  auto m = build_pass_matrix(grid({{P, F}, {P, P}}), {"s0", "s1"}, {"t0", "t1"});
  CHECK(m.row(0).to_string() == "10");
  CHECK(m.row(1).to_string() == "11");
  auto t = build_pass_matrix(grid({{P, T}, {P, P}}), {"s0", "s1"}, {"t0", "t1"});
  CHECK(t.popcount() == 3);
  CHECK_FALSE(t.at(0, 1));
}

TEST_CASE("build_pass_matrix lists every missing pair") {
  auto v = grid({{P, P}});
  try {
    build_pass_matrix(v, {"s0", "s1"}, {"t0", "t1"});
    FAIL("expected an exception");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(s1, t0)") != std::string::npos);
    CHECK(msg.find("(s1, t1)") != std::string::npos);
  }
}

TEST_CASE("pass rates") {
  std::vector<std::string> rows(64, "10");
  for (int i = 0; i < 6; ++i) rows[static_cast<std::size_t>(i)] = "11";
  auto m = matrix_of(rows);
  CHECK(test_pass_rate(m, 0) == 1.0);
  CHECK(test_pass_rate(m, 1) == 0.09375);
  CHECK(test_pass_rate(matrix_of({"0", "0"}), 0) == 0.0);
  CHECK_THROWS_AS(test_pass_rate(m, 2), std::out_of_range);
  CHECK_THROWS_AS(solution_pass_rate(m, 64), std::out_of_range);
}

TEST_CASE("hamming distance examples and metric properties") {
  auto v = [](const char* s) { return PassVector::from_string(s); };
  CHECK(hamming_distance(v("101"), v("001")) == 1);
  CHECK(hamming_distance(v("101"), v("101")) == 0);
  CHECK(hamming_distance(v("1100"), v("0011")) == 4);
  CHECK_THROWS_AS(hamming_distance(v("1"), v("10")), InvalidArgument);
  CHECK_THROWS_AS(PassVector::from_string("10x"), FormatError);

  std::mt19937_64 rng(3);
  std::bernoulli_distribution bit(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 130;
    PassVector a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a.set(i, bit(rng));
      b.set(i, bit(rng));
      c.set(i, bit(rng));
    }
    CHECK(hamming_distance(a, b) == hamming_distance(b, a));
    CHECK((hamming_distance(a, b) == 0) == (a == b));
    CHECK(hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c));
  }
}

TEST_CASE("group_by_pass_vector") {
  // Columns [1,1], [1,1], [0,1].
  auto m = matrix_of({"110", "111"});
  auto classes = group_by_pass_vector(m, Axis::tests);
  REQUIRE(classes.size() == 2);
  CHECK(classes[0].members == std::vector<std::size_t>{0, 1});
  CHECK(classes[1].members == std::vector<std::size_t>{2});
  CHECK(group_by_pass_vector(matrix_of({"10", "01"}), Axis::tests).size() == 2);
  auto rows = group_by_pass_vector(matrix_of(std::vector<std::string>(64, "101")), Axis::solutions);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].members.size() == 64);
  CHECK(group_by_pass_vector(matrix_of({}), Axis::solutions).empty());
}

TEST_CASE("grouping partitions both axes on random matrices") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = testing::random_matrix(rng, 1 + trial % 20, 1 + trial % 9, 0.6);
    for (auto axis : {Axis::solutions, Axis::tests}) {
      auto classes = group_by_pass_vector(m, axis);
      const std::size_t n = axis == Axis::solutions ? m.n_solutions() : m.n_tests();
      std::vector<int> seen(n, 0);
      for (const auto& c : classes) {
        for (auto i : c.members) {
          ++seen[i];
          CHECK((axis == Axis::solutions ? m.row(i) : m.column(i)) == c.signature);
        }
      }
      for (int s : seen) CHECK(s == 1);
    }
    double total = 0;
    for (std::size_t t = 0; t < m.n_tests(); ++t) total += test_pass_rate(m, t) * static_cast<double>(m.n_solutions());
    CHECK(total == doctest::Approx(static_cast<double>(m.popcount())));
  }
}

TEST_CASE("solution correctness") {
  auto m = matrix_of({"111", "101"});
  CHECK(solution_is_correct(m, 0));
  CHECK_FALSE(solution_is_correct(m, 1));
  CHECK(count_correct(m) == 1);
  auto empty = m.restrict_tests(std::vector<std::string>{});
  CHECK(solution_is_correct(empty, 1));
  CHECK_THROWS_AS(solution_is_correct(m, 2), std::out_of_range);
}

TEST_CASE("pass_at_k examples") {
  CHECK(pass_at_k(64, 64, 1) == 1.0);
  CHECK(pass_at_k(64, 0, 8) == 0.0);
  CHECK(pass_at_k(4, 2, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(pass_at_k(8, 4, 8) == 1.0);
  CHECK_THROWS_AS(pass_at_k(4, 2, 5), InvalidArgument);
  CHECK_THROWS_AS(pass_at_k(4, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(pass_at_k(4, 2, 0), InvalidArgument);
  // The log-space branch agrees with the exact one near the switch-over.
  CHECK(pass_at_k(200, 50, 10) == doctest::Approx(0.9479063705959571).epsilon(1e-9));
  std::vector<SampleCount> probs{{4, 2}, {4, 4}};
  CHECK(mean_pass_at_k(probs, 2) == doctest::Approx((5.0 / 6.0 + 1.0) / 2));
  CHECK(mean_pass_at_k({}, 1) == 0.0);
}

TEST_CASE("matrix json round trip") {
  auto m = matrix_of({"1011", "0000", "1111"});
  auto j = to_json(m);
  CHECK(j["rows"][0] == "1011");
  CHECK(matrix_from_json(j) == m);
  CHECK(m.restrict_tests(std::vector<std::string>{"t3", "t0"}).row(0).to_string() == "11");
}
