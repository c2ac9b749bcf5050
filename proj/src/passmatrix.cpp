#include "suitegen/passmatrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

#include "suitegen/error.hpp"

namespace suitegen::passmatrix {

PassVector::PassVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

PassVector PassVector::from_string(std::string_view bits) {
  PassVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i, true);
    } else if (bits[i] != '0') {
      throw FormatError("pass vector: unexpected character '" + std::string(1, bits[i]) + "'");
    }
  }
  return v;
}

void PassVector::set(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

std::size_t PassVector::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) {
    n += static_cast<std::size_t>(std::popcount(w));
  }
  return n;
}

std::string PassVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) {
      s[i] = '1';
    }
  }
  return s;
}

std::size_t hamming_distance(const PassVector& a, const PassVector& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("hamming_distance: length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  std::size_t d = 0;
  auto wa = a.words();
  auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    d += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  }
  return d;
}

// ---------------------------------------------------------------------------

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw InvalidArgument(std::string("pass matrix: duplicate ") + what + " id " + id);
    }
  }
}

} // namespace

PassMatrix::PassMatrix(std::vector<std::string> solution_ids, std::vector<std::string> test_ids,
                       std::vector<PassVector> rows)
    : solution_ids_(std::move(solution_ids)), test_ids_(std::move(test_ids)), rows_(std::move(rows)) {
  require_unique(solution_ids_, "solution");
  require_unique(test_ids_, "test");
  if (rows_.size() != solution_ids_.size()) {
    throw InvalidArgument("pass matrix: row count does not match solution ids");
  }
  column_counts_.assign(test_ids_.size(), 0);
  for (const auto& r : rows_) {
    if (r.size() != test_ids_.size()) {
      throw InvalidArgument("pass matrix: row length does not match test ids");
    }
    for (std::size_t t = 0; t < test_ids_.size(); ++t) {
      column_counts_[t] += r.get(t) ? 1 : 0;
    }
  }
}

PassVector PassMatrix::column(std::size_t test) const {
  if (test >= n_tests()) {
    throw std::out_of_range("pass matrix: test index out of range");
  }
  PassVector v(n_solutions());
  for (std::size_t s = 0; s < n_solutions(); ++s) {
    v.set(s, rows_[s].get(test));
  }
  return v;
}

std::size_t PassMatrix::popcount() const {
  std::size_t n = 0;
  for (const auto& r : rows_) {
    n += r.popcount();
  }
  return n;
}

std::size_t PassMatrix::test_index(const std::string& id) const {
  auto it = std::find(test_ids_.begin(), test_ids_.end(), id);
  if (it == test_ids_.end()) {
    throw InvalidArgument("pass matrix: unknown test id " + id);
  }
  return static_cast<std::size_t>(it - test_ids_.begin());
}

PassMatrix PassMatrix::restrict_tests(std::span<const std::string> test_ids) const {
  std::vector<std::size_t> cols;
  cols.reserve(test_ids.size());
  for (const auto& id : test_ids) {
    cols.push_back(test_index(id));
  }
  std::vector<PassVector> rows;
  rows.reserve(n_solutions());
  for (const auto& r : rows_) {
    PassVector v(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      v.set(k, r.get(cols[k]));
    }
    rows.push_back(std::move(v));
  }
  return PassMatrix(solution_ids_, {test_ids.begin(), test_ids.end()}, std::move(rows));
}

PassMatrix build_pass_matrix(const VerdictMap& verdicts, std::vector<std::string> solution_ids,
                             std::vector<std::string> test_ids) {
  std::vector<PassVector> rows;
  rows.reserve(solution_ids.size());
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& s : solution_ids) {
    PassVector row(test_ids.size());
    for (std::size_t t = 0; t < test_ids.size(); ++t) {
      auto it = verdicts.find({s, test_ids[t]});
      if (it == verdicts.end()) {
        if (n_missing++ < 20) {
          missing += " (" + s + ", " + test_ids[t] + ")";
        }
        continue;
      }
      row.set(t, it->second.passed());
    }
    rows.push_back(std::move(row));
  }
  if (n_missing > 0) {
    throw InvalidArgument("build_pass_matrix: " + std::to_string(n_missing) +
                          " missing verdicts:" + missing + (n_missing > 20 ? " ..." : ""));
  }
  return PassMatrix(std::move(solution_ids), std::move(test_ids), std::move(rows));
}

double test_pass_rate(const PassMatrix& m, std::size_t test) {
  if (test >= m.n_tests()) {
    throw std::out_of_range("test_pass_rate: index out of range");
  }
  if (m.n_solutions() == 0) {
    return 0.0;
  }
  return static_cast<double>(m.column_popcount(test)) / static_cast<double>(m.n_solutions());
}

double solution_pass_rate(const PassMatrix& m, std::size_t solution) {
  if (solution >= m.n_solutions()) {
    throw std::out_of_range("solution_pass_rate: index out of range");
  }
  if (m.n_tests() == 0) {
    return 1.0;
  }
  return static_cast<double>(m.row(solution).popcount()) / static_cast<double>(m.n_tests());
}

bool solution_is_correct(const PassMatrix& m, std::size_t solution) {
  if (solution >= m.n_solutions()) {
    throw std::out_of_range("solution_is_correct: index out of range");
  }
  return m.row(solution).all();
}

std::size_t count_correct(const PassMatrix& m) {
  std::size_t c = 0;
  for (std::size_t s = 0; s < m.n_solutions(); ++s) {
    c += m.row(s).all() ? 1 : 0;
  }
  return c;
}

std::vector<EquivalenceClass> group_by_pass_vector(const PassMatrix& m, Axis axis) {
  const std::size_t n = axis == Axis::solutions ? m.n_solutions() : m.n_tests();
  std::vector<EquivalenceClass> classes;
  std::map<PassVector, std::size_t> slot;
  for (std::size_t i = 0; i < n; ++i) {
    PassVector sig = axis == Axis::solutions ? m.row(i) : m.column(i);
    auto [it, inserted] = slot.try_emplace(sig, classes.size());
    if (inserted) {
      classes.push_back({std::move(sig), {}});
    }
    classes[it->second].members.push_back(i);
  }
  return classes;
}

// ---------------------------------------------------------------------------

namespace {

// Exact binomial coefficient; every intermediate C(n-k+i, i) fits in 64 bits
// for n <= 64, and the 128-bit product avoids overflow before the division.
std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) {
    return 0;
  }
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
  }
  return static_cast<std::uint64_t>(acc);
}

} // namespace

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
  if (c > n) {
    throw InvalidArgument("pass_at_k: c=" + std::to_string(c) + " exceeds n=" + std::to_string(n));
  }
  if (k < 1 || k > n) {
    throw InvalidArgument("pass_at_k: k=" + std::to_string(k) + " must lie in [1, n=" +
                          std::to_string(n) + "]");
  }
  if (n - c < k) {
    return 1.0;
  }
  if (n <= 64) {
    const std::uint64_t total = binomial(n, k);
    const std::uint64_t miss = binomial(n - c, k);
    return static_cast<double>(total - miss) / static_cast<double>(total);
  }
  const auto lg = [](std::size_t x) { return std::lgamma(static_cast<double>(x) + 1.0); };
  const double log_ratio = lg(n - c) - lg(n - c - k) - lg(n) + lg(n - k);
  return -std::expm1(log_ratio);
}

double mean_pass_at_k(std::span<const SampleCount> problems, std::size_t k) {
  if (problems.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& p : problems) {
    sum += pass_at_k(p.n, p.c, k);
  }
  return sum / static_cast<double>(problems.size());
}

// ---------------------------------------------------------------------------

Json to_json(const PassMatrix& m) {
  Json rows = Json::array();
  for (std::size_t s = 0; s < m.n_solutions(); ++s) {
    rows.push_back(m.row(s).to_string());
  }
  return {{"solution_ids", m.solution_ids()}, {"test_ids", m.test_ids()}, {"rows", rows}};
}

PassMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("solution_ids") || !j.contains("test_ids") ||
      !j.contains("rows")) {
    throw FormatError("pass matrix: expected {\"solution_ids\", \"test_ids\", \"rows\"}");
  }
  std::vector<PassVector> rows;
  for (const auto& r : j["rows"]) {
    rows.push_back(PassVector::from_string(r.get<std::string>()));
  }
  return PassMatrix(j["solution_ids"].get<std::vector<std::string>>(),
                    j["test_ids"].get<std::vector<std::string>>(), std::move(rows));
}

} // namespace suitegen::passmatrix
