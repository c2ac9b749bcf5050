#pragma once

// All-pairs similarity kernels over a dense embedding matrix. Each kernel has
// a serial reference and an OpenMP variant; both evaluate every pair with the
// same arithmetic, so their outputs are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace suitegen::kernels {

/// Row-major embeddings with validated rows (finite, nonzero norm) and cached norms.
class EmbeddingMatrix {
public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  double norm(std::size_t i) const { return norms_[i]; }

  /// Cosine of rows i and j using the cached norms.
  double similarity(std::size_t i, std::size_t j) const;

  /// Rows selected by index, in the given order.
  EmbeddingMatrix subset(std::span<const std::size_t> indices) const;

private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<double> norms_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

struct Edge {
  std::uint32_t a; // a < b
  std::uint32_t b;
  double similarity;
  friend bool operator==(const Edge&, const Edge&) = default;
};

namespace serial {
/// Every pair (a < b) with similarity strictly above `threshold`, sorted by (a, b).
std::vector<Edge> similarity_edges(const EmbeddingMatrix& m, double threshold);
/// Per-row mean of the k largest similarities to other rows. Requires rows > k.
std::vector<double> knn_means(const EmbeddingMatrix& m, std::size_t k);
} // namespace serial

namespace parallel {
/// threads == 0 uses the OpenMP default.
std::vector<Edge> similarity_edges(const EmbeddingMatrix& m, double threshold, int threads = 0);
std::vector<double> knn_means(const EmbeddingMatrix& m, std::size_t k, int threads = 0);
} // namespace parallel

} // namespace suitegen::kernels
