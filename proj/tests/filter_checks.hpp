#pragma once

// Invariant checks for one filter pass, plus a plain-loop reference of the
// retained set.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "suitegen/filtering.hpp"

namespace suitegen::testing {

inline std::vector<std::string> reference_retained(const passmatrix::PassMatrix& m,
                                                   const filtering::FilterConfig& c) {
  std::map<std::string, std::size_t> class_size;
  std::vector<std::string> kept;
  for (std::size_t j = 0; j < m.n_tests(); ++j) {
    if (static_cast<double>(m.column_popcount(j)) / static_cast<double>(m.n_solutions()) < c.lo) continue;
    if (++class_size[m.column(j).to_string()] > c.cap) continue;
    kept.push_back(m.test_ids()[j]);
  }
  return kept;
}

/// Empty when every contract of the filter pass holds for `d` on `m`.
inline std::vector<std::string> filter_violations(const passmatrix::PassMatrix& m, const filtering::FinalizeDecision& d,
                                                  const filtering::FilterConfig& c) {
  std::vector<std::string> out;
  std::set<std::string> all(m.test_ids().begin(), m.test_ids().end());
  std::set<std::string> seen;
  for (const auto& id : d.retained_test_ids) seen.insert(id);
  for (const auto& t : d.dropped_tests) {
    if (!seen.insert(t.id).second) out.push_back("test listed twice: " + t.id);
  }
  if (seen != all || d.retained_test_ids.size() + d.dropped_tests.size() != all.size()) {
    out.push_back("retained and dropped do not partition the suite");
  }
  const auto r = m.restrict_tests(d.retained_test_ids);
  std::map<std::string, std::size_t> classes;
  for (std::size_t j = 0; j < r.n_tests(); ++j) {
    if (passmatrix::test_pass_rate(r, j) < c.lo) out.push_back("low pass rate retained: " + r.test_ids()[j]);
    if (++classes[r.column(j).to_string()] > c.cap) out.push_back("class over cap at " + r.test_ids()[j]);
  }
  const auto perfect = passmatrix::count_correct(r);
  if (perfect != d.n_solutions_perfect) out.push_back("perfect count mismatch");
  if (d.kept != (d.reason == filtering::FinalizeReason::ok)) out.push_back("kept flag disagrees with reason");
  if (d.kept && (r.n_tests() < c.min_tests || perfect > c.max_perfect)) out.push_back("kept problem violates bounds");
  const auto expected_reason = r.n_tests() < c.min_tests   ? filtering::FinalizeReason::too_few_tests
                               : perfect > c.max_perfect    ? filtering::FinalizeReason::too_many_perfect
                                                            : filtering::FinalizeReason::ok;
  if (d.reason != expected_reason) out.push_back("wrong reason");
  if (d.retained_test_ids != reference_retained(m, c)) out.push_back("retained set differs from reference");
  const auto again = filtering::filter_pass(d.problem_id, r, c);
  if (again.retained_test_ids != d.retained_test_ids || again.reason != d.reason || !again.dropped_tests.empty()) {
    out.push_back("second pass changed the result");
  }
  return out;
}

} // namespace suitegen::testing
