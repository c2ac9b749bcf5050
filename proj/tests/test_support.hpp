#pragma once

// Shared helpers for the unit and acceptance suites.

#include <filesystem>
#include <random>
#include <string>

#include "suitegen/passmatrix.hpp"

namespace suitegen::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(FIXTURE_DIR) / rel; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("suitegen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random matrix with ids s<i> and t<j>; `density` is the pass probability.
inline passmatrix::PassMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                            double density) {
  std::bernoulli_distribution bit(density);
  std::vector<std::string> sids, tids;
  for (std::size_t i = 0; i < rows; ++i) sids.push_back("s" + std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j) tids.push_back("t" + std::to_string(j));
  std::vector<passmatrix::PassVector> data;
  for (std::size_t i = 0; i < rows; ++i) {
    passmatrix::PassVector v(cols);
    for (std::size_t j = 0; j < cols; ++j) v.set(j, bit(rng));
    data.push_back(std::move(v));
  }
  return {std::move(sids), std::move(tids), std::move(data)};
}

/// Matrix from rows of '0'/'1' strings.
inline passmatrix::PassMatrix matrix_of(const std::vector<std::string>& rows) {
  std::vector<std::string> sids, tids;
  std::vector<passmatrix::PassVector> data;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sids.push_back("s" + std::to_string(i));
    data.push_back(passmatrix::PassVector::from_string(rows[i]));
  }
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < cols; ++j) tids.push_back("t" + std::to_string(j));
  return {std::move(sids), std::move(tids), std::move(data)};
}

} // namespace suitegen::testing
