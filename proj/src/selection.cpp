#include "suitegen/selection.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "suitegen/error.hpp"

namespace suitegen::selection {

using passmatrix::PassMatrix;
using passmatrix::hamming_distance;

std::string_view to_string(Mode m) {
  return m == Mode::adversarial ? "adversarial" : "discriminative";
}

std::string_view to_string(Rationale r) {
  switch (r) {
  case Rationale::top_pass_rate: return "top_pass_rate";
  case Rationale::max_disagreement: return "max_disagreement";
  case Rationale::overlap_class: return "overlap_class";
  case Rationale::overlap_expansion: return "overlap_expansion";
  }
  return "";
}

Json to_json(const SelectionResult& r) {
  Json rationale = Json::object();
  for (std::size_t i = 0; i < r.solution_ids.size(); ++i) {
    rationale[r.solution_ids[i]] = to_string(r.rationale[i]);
  }
  return {{"mode", to_string(r.mode)},
          {"solution_ids", r.solution_ids},
          {"rationale", rationale},
          {"retained_test_ids", r.retained_test_ids}};
}

namespace {

void require_tests(const PassMatrix& m, const char* op) {
  if (m.n_tests() == 0 || m.n_solutions() == 0) {
    throw InvalidArgument(std::string(op) + ": empty pass matrix");
  }
}

void require_pool(const PassMatrix& m, const char* op) {
  if (m.n_solutions() < kSubsetSize) {
    throw InvalidArgument(std::string(op) + ": needs at least 5 solutions, got " +
                          std::to_string(m.n_solutions()));
  }
  if (m.n_tests() == 0) {
    throw InvalidArgument(std::string(op) + ": needs at least 1 retained test");
  }
}

void push(SelectionResult& r, const PassMatrix& m, std::size_t index, Rationale why) {
  r.solution_indices.push_back(index);
  r.solution_ids.push_back(m.solution_ids()[index]);
  r.rationale.push_back(why);
}

} // namespace

std::vector<std::string> prune_near_universal_tests(const PassMatrix& m, double hi_threshold) {
  require_tests(m, "prune_near_universal_tests");
  std::vector<std::string> kept;
  std::size_t lowest = 0;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    if (passmatrix::test_pass_rate(m, t) < hi_threshold) {
      kept.push_back(m.test_ids()[t]);
    }
    if (m.column_popcount(t) < m.column_popcount(lowest)) {
      lowest = t;
    }
  }
  if (kept.empty()) {
    kept.push_back(m.test_ids()[lowest]);
  }
  return kept;
}

std::vector<std::string> discriminative_prefilter(const PassMatrix& m, double lo_threshold) {
  require_tests(m, "discriminative_prefilter");
  std::vector<std::string> reliable;
  std::size_t highest = 0;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    if (passmatrix::test_pass_rate(m, t) >= lo_threshold) {
      reliable.push_back(m.test_ids()[t]);
    }
    if (m.column_popcount(t) > m.column_popcount(highest)) {
      highest = t;
    }
  }
  if (reliable.empty()) {
    return {m.test_ids()[highest]};
  }
  auto sub = m.restrict_tests(reliable);
  std::vector<std::string> kept;
  for (const auto& cls : passmatrix::group_by_pass_vector(sub, passmatrix::Axis::tests)) {
    kept.push_back(sub.test_ids()[cls.members.front()]);
  }
  // Classes come out in first-member order, which is already column order.
  return kept;
}

SelectionResult select_adversarial_solutions(const PassMatrix& m) {
  require_pool(m, "select_adversarial_solutions");
  SelectionResult r;
  r.mode = Mode::adversarial;
  r.retained_test_ids = m.test_ids();

  std::vector<std::size_t> order(m.n_solutions());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.row(a).popcount() > m.row(b).popcount();
  });
  push(r, m, order[0], Rationale::top_pass_rate);
  push(r, m, order[1], Rationale::top_pass_rate);

  std::vector<bool> taken(m.n_solutions(), false);
  taken[order[0]] = taken[order[1]] = true;

  // First dispersion pick: total distance to the two anchors.
  // Later picks: minimum distance to everything chosen so far.
  for (std::size_t step = 0; step < 3; ++step) {
    std::size_t best = m.n_solutions();
    std::size_t best_score = 0;
    for (std::size_t s = 0; s < m.n_solutions(); ++s) {
      if (taken[s]) continue;
      std::size_t score = step == 0 ? 0 : std::numeric_limits<std::size_t>::max();
      for (std::size_t chosen : r.solution_indices) {
        std::size_t d = hamming_distance(m.row(s), m.row(chosen));
        score = step == 0 ? score + d : std::min(score, d);
      }
      if (best == m.n_solutions() || score > best_score) {
        best = s;
        best_score = score;
      }
    }
    taken[best] = true;
    push(r, m, best, Rationale::max_disagreement);
  }
  return r;
}

SelectionResult select_discriminative_solutions(const PassMatrix& m) {
  require_pool(m, "select_discriminative_solutions");
  SelectionResult r;
  r.mode = Mode::discriminative;
  r.retained_test_ids = m.test_ids();

  auto classes = passmatrix::group_by_pass_vector(m, passmatrix::Axis::solutions);
  const passmatrix::EquivalenceClass* largest = &classes.front();
  for (const auto& c : classes) {
    if (c.members.size() > largest->members.size()) {
      largest = &c;
    }
  }

  if (largest->members.size() >= kSubsetSize) {
    for (std::size_t i = 0; i < kSubsetSize; ++i) {
      push(r, m, largest->members[i], Rationale::overlap_class);
    }
    return r;
  }

  std::vector<bool> taken(m.n_solutions(), false);
  for (auto s : largest->members) {
    push(r, m, s, Rationale::overlap_class);
    taken[s] = true;
  }
  while (r.solution_indices.size() < kSubsetSize) {
    // Every candidate is averaged over the same member count, so comparing
    // distance sums is exact and equivalent to comparing means.
    std::size_t best = m.n_solutions();
    std::size_t best_sum = 0;
    for (std::size_t s = 0; s < m.n_solutions(); ++s) {
      if (taken[s]) continue;
      std::size_t sum = 0;
      for (std::size_t member : r.solution_indices) {
        sum += hamming_distance(m.row(s), m.row(member));
      }
      if (best == m.n_solutions() || sum < best_sum) {
        best = s;
        best_sum = sum;
      }
    }
    taken[best] = true;
    push(r, m, best, Rationale::overlap_expansion);
  }
  return r;
}

} // namespace suitegen::selection
