#include "suitegen/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <omp.h>

#include "suitegen/error.hpp"

namespace suitegen::kernels {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (values_.size() != rows_ * dim_) {
    throw InvalidEmbedding("embedding matrix: value count does not match rows x dim");
  }
  if (rows_ > 0 && dim_ == 0) {
    throw InvalidEmbedding("embedding matrix: zero dimension");
  }
  norms_.resize(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    if (!std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); })) {
      throw InvalidEmbedding("embedding row " + std::to_string(i) + " has a non-finite entry");
    }
    norms_[i] = l2_norm(r);
    if (norms_[i] == 0.0) {
      throw InvalidEmbedding("embedding row " + std::to_string(i) + " has zero norm");
    }
  }
}

double EmbeddingMatrix::similarity(std::size_t i, std::size_t j) const {
  return dot(row(i), row(j)) / (norms_[i] * norms_[j]);
}

EmbeddingMatrix EmbeddingMatrix::subset(std::span<const std::size_t> indices) const {
  std::vector<double> values;
  values.reserve(indices.size() * dim_);
  for (std::size_t idx : indices) {
    auto r = row(idx);
    values.insert(values.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(indices.size(), dim_, std::move(values));
}

namespace {

void row_edges(const EmbeddingMatrix& m, std::size_t i, double threshold, std::vector<Edge>& out) {
  for (std::size_t j = i + 1; j < m.rows(); ++j) {
    double s = m.similarity(i, j);
    if (s > threshold) {
      out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), s});
    }
  }
}

double row_knn_mean(const EmbeddingMatrix& m, std::size_t i, std::size_t k,
                    std::vector<double>& scratch) {
  scratch.clear();
  for (std::size_t j = 0; j < m.rows(); ++j) {
    if (j != i) {
      scratch.push_back(m.similarity(i, j));
    }
  }
  auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(scratch.begin(), kth, scratch.end(), std::greater<>());
  double sum = 0.0;
  for (auto it = scratch.begin(); it != kth; ++it) {
    sum += *it;
  }
  return sum / static_cast<double>(k);
}

void check_knn(const EmbeddingMatrix& m, std::size_t k) {
  if (k == 0) {
    throw InvalidArgument("knn: k must be positive");
  }
  if (m.rows() <= k) {
    throw InvalidArgument("knn: corpus of " + std::to_string(m.rows()) +
                          " is too small for k=" + std::to_string(k) + "; need at least " +
                          std::to_string(k + 1) + " problems");
  }
}

} // namespace

namespace serial {

std::vector<Edge> similarity_edges(const EmbeddingMatrix& m, double threshold) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    row_edges(m, i, threshold, edges);
  }
  return edges;
}

std::vector<double> knn_means(const EmbeddingMatrix& m, std::size_t k) {
  check_knn(m, k);
  std::vector<double> means(m.rows());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    means[i] = row_knn_mean(m, i, k, scratch);
  }
  return means;
}

} // namespace serial

namespace parallel {

std::vector<Edge> similarity_edges(const EmbeddingMatrix& m, double threshold, int threads) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
  // Per-row buffers keep the merge in row order regardless of scheduling.
  std::vector<std::vector<Edge>> per_row(m.rows());
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    row_edges(m, static_cast<std::size_t>(i), threshold, per_row[static_cast<std::size_t>(i)]);
  }
  std::vector<Edge> edges;
  for (auto& r : per_row) {
    edges.insert(edges.end(), r.begin(), r.end());
  }
  return edges;
}

std::vector<double> knn_means(const EmbeddingMatrix& m, std::size_t k, int threads) {
  check_knn(m, k);
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
  std::vector<double> means(m.rows());
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      means[static_cast<std::size_t>(i)] = row_knn_mean(m, static_cast<std::size_t>(i), k, scratch);
    }
  }
  return means;
}

} // namespace parallel

} // namespace suitegen::kernels
