#pragma once

// Solution subsets that condition test generation, and the test pruning each
// generation mode applies first. Every tie resolves to the lower index.

#include <string>
#include <vector>

#include "suitegen/jsonl.hpp"
#include "suitegen/passmatrix.hpp"

namespace suitegen::selection {

inline constexpr std::size_t kSubsetSize = 5;

enum class Mode { adversarial, discriminative };
enum class Rationale { top_pass_rate, max_disagreement, overlap_class, overlap_expansion };

std::string_view to_string(Mode m);
std::string_view to_string(Rationale r);

struct SelectionResult {
  Mode mode = Mode::adversarial;
  std::vector<std::string> solution_ids; // pick order
  std::vector<std::size_t> solution_indices;
  std::vector<Rationale> rationale;      // parallel to solution_ids
  std::vector<std::string> retained_test_ids;
};

Json to_json(const SelectionResult& r);

/// Tests with pass rate < hi_threshold. When none qualify, the single
/// lowest-rate test is kept instead. Throws InvalidArgument on an empty matrix.
std::vector<std::string> prune_near_universal_tests(const passmatrix::PassMatrix& m,
                                                    double hi_threshold = 0.9);

/// Drops tests with pass rate < lo_threshold, then keeps the first test of each
/// pass-vector class. When none survive, keeps the single highest-rate test.
std::vector<std::string> discriminative_prefilter(const passmatrix::PassMatrix& m,
                                                  double lo_threshold = 0.1);

/// Two highest-pass-rate rows, then three more by greedy farthest-point
/// dispersion over the remainder: first by total Hamming distance to the top
/// two, then by minimum Hamming distance to everything chosen.
/// `m` must already be restricted to the pruned suite.
SelectionResult select_adversarial_solutions(const passmatrix::PassMatrix& m);

/// The largest pass-vector class of rows (first five members if it has five),
/// otherwise expanded one row at a time by minimal mean Hamming distance to
/// the current members.
SelectionResult select_discriminative_solutions(const passmatrix::PassMatrix& m);

} // namespace suitegen::selection
