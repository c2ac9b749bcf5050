#pragma once

// Binary solutions x tests outcome matrix and the analytics built on it.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "suitegen/jsonl.hpp"
#include "suitegen/verdict.hpp"

namespace suitegen::passmatrix {

/// Fixed-length bit sequence, packed into 64-bit words. Unused tail bits are zero.
class PassVector {
public:
  PassVector() = default;
  explicit PassVector(std::size_t size);
  /// From an ASCII '0'/'1' string; throws FormatError on other characters.
  static PassVector from_string(std::string_view bits);

  std::size_t size() const { return size_; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool value);
  std::size_t popcount() const;
  bool all() const { return popcount() == size_; }
  std::string to_string() const;
  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const PassVector&, const PassVector&) = default;
  friend auto operator<=>(const PassVector& a, const PassVector& b) {
    if (auto c = a.size_ <=> b.size_; c != 0) return c;
    return a.words_ <=> b.words_;
  }

private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Throws InvalidArgument on length mismatch.
std::size_t hamming_distance(const PassVector& a, const PassVector& b);

/// Immutable after construction; rows are solutions, columns are tests.
class PassMatrix {
public:
  PassMatrix() = default;
  /// Throws InvalidArgument if ids repeat or row lengths disagree with test_ids.
  PassMatrix(std::vector<std::string> solution_ids, std::vector<std::string> test_ids,
             std::vector<PassVector> rows);

  std::size_t n_solutions() const { return solution_ids_.size(); }
  std::size_t n_tests() const { return test_ids_.size(); }
  const std::vector<std::string>& solution_ids() const { return solution_ids_; }
  const std::vector<std::string>& test_ids() const { return test_ids_; }

  bool at(std::size_t solution, std::size_t test) const { return rows_[solution].get(test); }
  const PassVector& row(std::size_t solution) const { return rows_.at(solution); }
  PassVector column(std::size_t test) const;
  std::size_t column_popcount(std::size_t test) const { return column_counts_.at(test); }
  std::size_t popcount() const;

  /// Keeps only the listed tests, in the listed order.
  PassMatrix restrict_tests(std::span<const std::string> test_ids) const;
  std::size_t test_index(const std::string& id) const;

  friend bool operator==(const PassMatrix&, const PassMatrix&) = default;

private:
  std::vector<std::string> solution_ids_;
  std::vector<std::string> test_ids_;
  std::vector<PassVector> rows_;
  std::vector<std::size_t> column_counts_;
};

using CellKey = std::pair<std::string, std::string>; // (solution_id, test_id)
using VerdictMap = std::map<CellKey, Verdict>;

/// Bit is 1 iff the verdict is pass. Throws InvalidArgument listing every
/// missing (solution, test) pair.
PassMatrix build_pass_matrix(const VerdictMap& verdicts, std::vector<std::string> solution_ids,
                             std::vector<std::string> test_ids);

/// Fraction of solutions passing the test; throws std::out_of_range.
double test_pass_rate(const PassMatrix& m, std::size_t test);
double solution_pass_rate(const PassMatrix& m, std::size_t solution);

/// True iff the row is all ones (vacuously true with no tests).
bool solution_is_correct(const PassMatrix& m, std::size_t solution);
std::size_t count_correct(const PassMatrix& m);

enum class Axis { solutions, tests };

struct EquivalenceClass {
  PassVector signature;
  std::vector<std::size_t> members; // ascending indices on the grouped axis
};

/// Exact partition by pass vector; classes ordered by first member.
std::vector<EquivalenceClass> group_by_pass_vector(const PassMatrix& m, Axis axis);

/// Unbiased pass@k estimate 1 - C(n-c, k) / C(n, k). Exact rational evaluation
/// for n <= 64, log-space otherwise. Throws InvalidArgument unless
/// 0 <= c <= n and 1 <= k <= n.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

struct SampleCount {
  std::size_t n;
  std::size_t c;
};

/// Arithmetic mean of per-problem estimates; 0 for an empty list.
double mean_pass_at_k(std::span<const SampleCount> problems, std::size_t k);

Json to_json(const PassMatrix& m);
PassMatrix matrix_from_json(const Json& j);

} // namespace suitegen::passmatrix
